"""Pytest fixtures."""

import pathlib
import shutil
from typing import Iterator

import pytest

from chafparse import config
from chafparse.model import grammar_mod


TEST_FOLDER = pathlib.Path(__file__).parent
DATA_FOLDER = TEST_FOLDER / "data"
OUTPUT_FOLDER = TEST_FOLDER / "output"
CONFIG_PATH = DATA_FOLDER / "chafparse.toml"


@pytest.fixture(autouse=True)
def default_settings() -> Iterator[config.Settings]:
    """Start and finish every test with default settings."""
    config.settings.reset()
    yield config.settings
    config.settings.reset()


@pytest.fixture()
def empty_output_folder() -> pathlib.Path:
    """Create an empty output folder prior to each test."""
    if OUTPUT_FOLDER.exists():
        for item in OUTPUT_FOLDER.iterdir():
            if item.is_dir():
                shutil.rmtree(item, ignore_errors=True)
            else:
                item.unlink()
    else:
        OUTPUT_FOLDER.mkdir(parents=True)
    return OUTPUT_FOLDER


@pytest.fixture
def prefix_grammar() -> grammar_mod.Grammar:
    """S ::= A B; A ::= B; A ::= x a; B ::= x b, not augmented."""
    return grammar_mod.load_grammar(DATA_FOLDER / "prefix.bnf")


@pytest.fixture
def quad_grammar() -> grammar_mod.Grammar:
    """S ::= A A A A; A ::= a; A ::= ε, not augmented."""
    return grammar_mod.load_grammar(DATA_FOLDER / "quad.bnf")


@pytest.fixture
def pair_grammar() -> grammar_mod.Grammar:
    """S ::= A A; A ::= a; A ::= ε, not augmented."""
    return grammar_mod.load_grammar(DATA_FOLDER / "pair.bnf")


@pytest.fixture
def prefix_augmented(prefix_grammar: grammar_mod.Grammar) -> grammar_mod.Grammar:
    return grammar_mod.augment(prefix_grammar)


@pytest.fixture
def quad_augmented(quad_grammar: grammar_mod.Grammar) -> grammar_mod.Grammar:
    return grammar_mod.augment(quad_grammar)


@pytest.fixture
def pair_augmented(pair_grammar: grammar_mod.Grammar) -> grammar_mod.Grammar:
    return grammar_mod.augment(pair_grammar)
