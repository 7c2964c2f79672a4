"""Test AHFA construction and statistics."""

import pytest

from chafparse.model import ahfa_mod, grammar_mod, rewrite_mod
from chafparse.model.ahfa_mod import EPSILON, StateKind


PREFIX_STATES = {
    "C0": {"S′ ::= • S"},
    "P1": {"S ::= • A B", "A ::= • B", "A ::= • x a", "B ::= • x b"},
    "C2": {"A ::= x • a", "B ::= x • b"},
    "C3": {"S ::= A • B"},
    "P2": {"B ::= • x b"},
    "C4": {"S ::= A B •"},
    "C5": {"B ::= x • b"},
    "C6": {"B ::= x b •"},
    "C7": {"A ::= x a •"},
    "C8": {"S′ ::= S •"},
}


@pytest.fixture
def prefix_ahfa(
    prefix_augmented: grammar_mod.Grammar,
) -> tuple[list[ahfa_mod.AhfaState], ahfa_mod.GotoTable, dict[str, int]]:
    """The AHFA of the example grammar, with the drawn labels mapped to ids."""
    states, table = ahfa_mod.build_ahfa(rewrite_mod.nnf_rewrite(prefix_augmented))
    by_items = {frozenset(str(dr) for dr in state.items): state.id for state in states}
    labels = {label: by_items[frozenset(items)] for label, items in PREFIX_STATES.items()}
    return states, table, labels


def test_prefix_states(prefix_ahfa) -> None:
    """Every drawn state is built, plus the state reached from P1 on B."""
    # Arrange
    states, table, labels = prefix_ahfa
    # Assert
    assert len(states) == 11
    assert len(labels) == 10
    extra = ahfa_mod.goto(table, labels["P1"], grammar_mod.Symbol("B"))
    assert extra is not None
    assert extra not in labels.values()
    assert {str(dr) for dr in states[extra].items} == {"A ::= B •"}
    assert states[labels["C0"]].id == 0
    assert states[labels["P1"]].kind == StateKind.PREDICTED
    assert states[labels["P2"]].kind == StateKind.PREDICTED
    assert sum(state.kind == StateKind.CONFIRMED for state in states) == 9


def test_prefix_transitions(prefix_ahfa) -> None:
    """Transitions drawn in the example, by label."""
    # Arrange
    states, table, labels = prefix_ahfa
    sym = grammar_mod.Symbol
    x, a, b = sym("x", True), sym("a", True), sym("b", True)
    # Assert
    assert ahfa_mod.goto(table, labels["C0"], EPSILON) == labels["P1"]
    assert ahfa_mod.goto(table, labels["C3"], EPSILON) == labels["P2"]
    assert ahfa_mod.goto(table, labels["C0"], sym("S")) == labels["C8"]
    assert ahfa_mod.goto(table, labels["P1"], x) == labels["C2"]
    assert ahfa_mod.goto(table, labels["P1"], sym("A")) == labels["C3"]
    assert ahfa_mod.goto(table, labels["C2"], a) == labels["C7"]
    assert ahfa_mod.goto(table, labels["C2"], b) == labels["C6"]
    assert ahfa_mod.goto(table, labels["C3"], sym("B")) == labels["C4"]
    assert ahfa_mod.goto(table, labels["P2"], x) == labels["C5"]
    assert ahfa_mod.goto(table, labels["C5"], b) == labels["C6"]
    epsilon_edges = [edge for edge in table.edges() if edge[1] == EPSILON]
    assert len(epsilon_edges) == 2
    for label in (EPSILON, sym("S"), x, a, b):
        assert ahfa_mod.goto(table, labels["C8"], label) is None


def test_prefix_duplication(prefix_ahfa) -> None:
    """B ::= x • b is shared by C2 and C5, its prediction by P1 and P2."""
    # Arrange
    states, _, labels = prefix_ahfa
    # Act
    stats = ahfa_mod.ahfa_statistics(states)
    # Assert
    duplicated = {str(dr): ids for dr, ids in stats.duplicated.items()}
    assert duplicated == {
        "B ::= x • b": tuple(sorted((labels["C2"], labels["C5"]))),
        "B ::= • x b": tuple(sorted((labels["P1"], labels["P2"]))),
    }


def test_prefix_statistics(prefix_ahfa) -> None:
    """Size histograms and completed-LHS counts of the example."""
    # Arrange
    states, _, _ = prefix_ahfa
    # Act
    stats = ahfa_mod.ahfa_statistics(states)
    # Assert
    predicted = stats.by_kind[StateKind.PREDICTED]
    assert predicted.count == 2
    assert predicted.histogram == {1: 1, 4: 1}
    assert predicted.mean_size == pytest.approx(2.5)
    assert predicted.mean_square_size == pytest.approx(8.5)
    confirmed = stats.by_kind[StateKind.CONFIRMED]
    assert confirmed.count == 9
    assert confirmed.histogram == {1: 8, 2: 1}
    assert confirmed.mean_size == pytest.approx(10 / 9)
    assert max(stats.completed_lhs_counts.values()) <= 1
    assert stats.completed_lhs_histogram == {0: 6, 1: 5}
    assert stats.total_items == 15
    assert stats.distinct_items == 13


def test_single_rule_grammar() -> None:
    """S ::= t gives four states and one ε-transition."""
    # Arrange
    grammar = grammar_mod.augment(grammar_mod.parse_grammar("start: S\nS ::= t"))
    # Act
    states, table = ahfa_mod.build_ahfa(rewrite_mod.nnf_rewrite(grammar))
    # Assert
    assert len(states) == 4
    assert sum(1 for edge in table.edges() if edge[1] == EPSILON) == 1


def test_nulling_closure(pair_augmented: grammar_mod.Grammar) -> None:
    """Dotted rules are advanced past nulling symbols inside a state."""
    # Act
    states, table = ahfa_mod.build_ahfa(rewrite_mod.nnf_rewrite(pair_augmented))
    # Assert
    holder = [
        state for state in states if "S ::= Ae • Ae" in {str(dr) for dr in state.items}
    ]
    assert len(holder) == 1
    items = {str(dr) for dr in holder[0].items}
    assert {"S ::= • Ae Ae", "S ::= Ae Ae •", "S ::= Ae • A"} <= items
    assert all("Ae ::=" not in str(dr) for state in states for dr in state.items)
    assert all(label != grammar_mod.Symbol("Ae") for _, label, _ in table.edges())


def test_needs_nnf(quad_augmented: grammar_mod.Grammar) -> None:
    """The AHFA is only built for NNF grammars."""
    # Act / Assert
    with pytest.raises(ahfa_mod.AhfaError):
        ahfa_mod.build_ahfa(rewrite_mod.chaf_rewrite(quad_augmented))


def test_state_labels(prefix_ahfa) -> None:
    """Labels show kind and id."""
    # Arrange
    states, _, labels = prefix_ahfa
    # Assert
    assert states[labels["C0"]].label == "C0"
    assert states[labels["P1"]].label == f"P{labels['P1']}"
    assert states[labels["C8"]].completed_lhs() == frozenset(
        {grammar_mod.Symbol("S′")}
    )
