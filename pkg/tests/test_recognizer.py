"""Test the three-phase Earley recognizer."""

import itertools
import random
from typing import Iterator

import hypothesis
import pytest
from hypothesis import strategies as st

from chafparse.features import oracle
from chafparse.model import grammar_mod, recognizer_mod, rewrite_mod
from chafparse.model.recognizer_mod import DottedRule, EarleyItem, Phase


def _item_texts(chart: recognizer_mod.Chart, location: int) -> set[tuple[str, int]]:
    return {(str(item.dr), item.origin) for item in chart.sets[location].items}


def _inputs(
    terminals: tuple[grammar_mod.Symbol, ...], max_len: int, cap: int
) -> Iterator[tuple[str, ...]]:
    names = [sym.name for sym in terminals]
    generated = itertools.chain.from_iterable(
        itertools.product(names, repeat=length) for length in range(max_len + 1)
    )
    return itertools.islice(generated, cap)


@pytest.fixture
def prefix_null_free(prefix_grammar: grammar_mod.Grammar) -> rewrite_mod.RewrittenGrammar:
    return rewrite_mod.prepare_grammar(prefix_grammar)


def test_dotted_rule(prefix_augmented: grammar_mod.Grammar) -> None:
    """Postdot symbols and dot movement."""
    # Arrange
    rule = prefix_augmented.rules[1]
    # Act
    start = DottedRule(rule, 0)
    # Assert
    assert str(start) == "S ::= • A B"
    assert recognizer_mod.postdot(start) == prefix_augmented.symbol("A")
    assert recognizer_mod.next_dr(start) == DottedRule(rule, 1)
    done = DottedRule(rule, 2)
    assert done.is_completion
    assert recognizer_mod.postdot(done) is None
    assert recognizer_mod.next_dr(done) is None
    with pytest.raises(recognizer_mod.RecognizerError):
        DottedRule(rule, 3)


def test_predictions_prefix(prefix_augmented: grammar_mod.Grammar) -> None:
    """One-step and transitive prediction from the initial item."""
    # Arrange
    initial = EarleyItem(DottedRule(prefix_augmented.accept_rule, 0), 0, 0)
    # Act
    one_step = recognizer_mod.opred(initial, prefix_augmented)
    closure = recognizer_mod.ahpred(initial, prefix_augmented)
    # Assert
    assert {str(item.dr) for item in one_step} == {"S ::= • A B"}
    assert {str(item.dr) for item in closure} == {
        "S ::= • A B",
        "A ::= • B",
        "A ::= • x a",
        "B ::= • x b",
    }
    assert all(item.origin == 0 and item.current == 0 for item in closure)


def test_prediction_closure_prefix(prefix_augmented: grammar_mod.Grammar) -> None:
    """The closure of S lists the four dot-0 rules of the predicted state."""
    # Act
    closure = recognizer_mod.precompute_prediction_closure(prefix_augmented)
    # Assert
    assert {str(rule) for rule in closure.rules_for(prefix_augmented.start)} == {
        "S ::= A B",
        "A ::= B",
        "A ::= x a",
        "B ::= x b",
    }
    assert closure.mask(prefix_augmented.symbol("x")) == 0


def test_prediction_closure_empty_rules(pair_augmented: grammar_mod.Grammar) -> None:
    """Closures are only built for grammars without empty rules."""
    # Act / Assert
    with pytest.raises(recognizer_mod.RecognizerError):
        recognizer_mod.precompute_prediction_closure(pair_augmented)


def test_iter_bits() -> None:
    """Set bits come out lowest first."""
    # Assert
    assert list(recognizer_mod.iter_bits(0b101001)) == [0, 3, 5]
    assert list(recognizer_mod.iter_bits(1 << 200)) == [200]


def test_set0_prefix(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """Set 0 is the seed item and its predictions."""
    # Act
    chart = recognizer_mod.Chart(prefix_null_free)
    chart.initialize()
    # Assert
    assert _item_texts(chart, 0) == {
        ("S′ ::= • S", 0),
        ("S ::= • A B", 0),
        ("A ::= • B", 0),
        ("A ::= • x a", 0),
        ("B ::= • x b", 0),
    }
    assert chart.frontier == 0
    with pytest.raises(recognizer_mod.RecognizerError):
        chart.initialize()


def test_sets_prefix(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """Scan, reduction and prediction on x a."""
    # Act
    accepted, chart = recognizer_mod.recognize(prefix_null_free, ["x", "a"])
    # Assert
    assert not accepted
    assert _item_texts(chart, 1) == {("A ::= x • a", 0), ("B ::= x • b", 0)}
    assert _item_texts(chart, 2) == {
        ("A ::= x a •", 0),
        ("S ::= A • B", 0),
        ("B ::= • x b", 2),
    }
    earley_set = chart.sets[2]
    phases = {str(item.dr): earley_set.phase_of(item) for item in earley_set.items}
    assert phases == {
        "A ::= x a •": Phase.SCAN,
        "S ::= A • B": Phase.REDUCE,
        "B ::= • x b": Phase.PREDICT,
    }


def test_accept_prefix(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """x a x b is a sentence, x a x is not."""
    # Act
    accepted, _ = recognizer_mod.recognize(prefix_null_free, ["x", "a", "x", "b"])
    rejected, _ = recognizer_mod.recognize(prefix_null_free, ["x", "a", "x"])
    empty, _ = recognizer_mod.recognize(prefix_null_free, [])
    # Assert
    assert accepted
    assert not rejected
    assert not empty


def test_trivial_parse(quad_grammar: grammar_mod.Grammar) -> None:
    """Empty input is accepted when the start symbol is nullable."""
    # Arrange
    null_free = rewrite_mod.prepare_grammar(quad_grammar)
    # Act
    accepted, chart = recognizer_mod.recognize(null_free, [])
    # Assert
    assert accepted
    assert len(chart.sets) == 1


def test_nulling_start() -> None:
    """A grammar for the empty language of ε only accepts empty input."""
    # Arrange
    null_free = rewrite_mod.prepare_grammar(grammar_mod.parse_grammar("start: S\nS ::="))
    # Act
    accepted, chart = recognizer_mod.recognize(null_free, [])
    # Assert
    assert accepted
    assert null_free.grammar.rules == ()
    assert recognizer_mod.acceptable_tokens(chart) == frozenset()


def test_start_without_rules() -> None:
    """A start symbol with no rules accepts nothing."""
    # Arrange
    start = grammar_mod.Symbol("S")
    grammar = grammar_mod.Grammar((start, grammar_mod.Symbol("t", True)), (), start)
    null_free = rewrite_mod.prepare_grammar(grammar)
    # Act
    empty, _ = recognizer_mod.recognize(null_free, [])
    one, chart = recognizer_mod.recognize(null_free, ["t"])
    # Assert
    assert not empty
    assert not one
    assert chart.exhausted


def test_chart_rejects_nullable_grammar(quad_augmented: grammar_mod.Grammar) -> None:
    """The recognizer needs nulling symbols eliminated first."""
    # Arrange
    chaf = rewrite_mod.chaf_rewrite(quad_augmented)
    # Act / Assert
    with pytest.raises(recognizer_mod.RecognizerError):
        recognizer_mod.Chart(chaf)


def test_chart_errors(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """Unknown tokens, uninitialized charts and overlong input."""
    # Arrange
    chart = recognizer_mod.Chart(prefix_null_free, input_length=1)
    # Act / Assert
    with pytest.raises(recognizer_mod.RecognizerError):
        chart.advance("x")
    chart.initialize()
    with pytest.raises(recognizer_mod.RecognizerError):
        chart.advance("S")
    with pytest.raises(recognizer_mod.RecognizerError):
        chart.advance("zzz")
    chart.advance("x")
    with pytest.raises(recognizer_mod.RecognizerError):
        chart.advance("a")


def test_token_values(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """Token values default to the terminal's name."""
    # Act
    _, chart = recognizer_mod.recognize(prefix_null_free, [("x", 7), "a"])
    # Assert
    assert [(sym.name, value) for sym, value in chart.tokens] == [("x", 7), ("a", "a")]


def test_exhausted(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """A dead prefix leaves an empty frontier set."""
    # Act
    _, chart = recognizer_mod.recognize(prefix_null_free, ["a"])
    # Assert
    assert chart.exhausted
    assert recognizer_mod.acceptable_tokens(chart) == frozenset()


def test_acceptable_tokens_prefix(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """Expected terminals at the frontier."""
    # Arrange
    chart = recognizer_mod.Chart(prefix_null_free)
    chart.initialize()
    # Act
    at_start = recognizer_mod.acceptable_tokens(chart)
    chart.advance("x")
    after_x = recognizer_mod.acceptable_tokens(chart)
    # Assert
    assert {sym.name for sym in at_start} == {"x"}
    assert {sym.name for sym in after_x} == {"a", "b"}


def test_progress_report_chaf(quad_grammar: grammar_mod.Grammar) -> None:
    """Continuation items are reported against the pre-rewrite rule."""
    # Arrange
    null_free = rewrite_mod.prepare_grammar(quad_grammar)
    pre_rule = null_free.original.rules[1]
    # Act
    _, chart = recognizer_mod.recognize(null_free, ["a"] * 4)
    report = recognizer_mod.progress_report(chart, 2)
    # Assert
    internal = {
        (str(item.dr), item.origin) for item in chart.sets[2].items
    }
    assert ("S1 ::= A • S2", 1) in internal
    assert (DottedRule(pre_rule, 2), 0) in report
    final = recognizer_mod.progress_report(chart, 4)
    assert (DottedRule(null_free.original.accept_rule, 1), 0) in final
    assert (DottedRule(pre_rule, 4), 0) in final
    with pytest.raises(recognizer_mod.RecognizerError):
        recognizer_mod.progress_report(chart, 5)


def test_progress_report_order(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """Reports are sorted by origin, then rule order, then dot position."""
    # Act
    _, chart = recognizer_mod.recognize(prefix_null_free, ["x", "a"])
    report = recognizer_mod.progress_report(chart, 2)
    # Assert
    assert [(str(dotted), origin) for dotted, origin in report] == [
        ("S ::= A • B", 0),
        ("A ::= x a •", 0),
        ("B ::= • x b", 2),
    ]


def test_chart_stats_prefix(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """Item counts for x a x b match the hand count."""
    # Act
    _, chart = recognizer_mod.recognize(prefix_null_free, ["x", "a", "x", "b"])
    stats = recognizer_mod.chart_stats(chart)
    # Assert
    assert stats.items_per_set == (5, 2, 3, 1, 3)
    assert stats.total_items == 14
    assert stats.attempts - stats.duplicate_attempts == stats.total_items
    assert stats.phase_counts == {
        Phase.SEED: 1,
        Phase.SCAN: 5,
        Phase.REDUCE: 3,
        Phase.PREDICT: 5,
    }
    reference = oracle.reference_chart(prefix_null_free.grammar, ["x", "a", "x", "b"])
    assert sum(len(earley_set) for earley_set in reference) == 14


def test_trace_lines(prefix_null_free: rewrite_mod.RewrittenGrammar) -> None:
    """One trace line per item, with its phase."""
    # Act
    _, chart = recognizer_mod.recognize(prefix_null_free, ["x"])
    lines = chart.trace_lines()
    # Assert
    assert lines[0] == "set=0 item=S′ ::= • S origin=0 phase=seed"
    assert "set=1 item=A ::= x • a origin=0 phase=scan" in lines
    assert len(lines) == 7


@hypothesis.settings(max_examples=200, deadline=None)
@hypothesis.given(st.integers(min_value=0, max_value=10**6))
def test_prediction_closure_matches_ahpred(seed: int) -> None:
    """Precomputed closures equal iterated one-step prediction."""
    # Arrange
    grammar = oracle.random_grammar(
        random.Random(seed), max_symbols=8, max_rules=14, allow_empty_rules=False
    )
    # Act
    closure = recognizer_mod.precompute_prediction_closure(grammar)
    # Assert
    for rule in grammar.rules:
        for pos in range(len(rule.rhs) + 1):
            item = EarleyItem(DottedRule(rule, pos), 0, 1)
            assert closure.predicted_items(item) == recognizer_mod.ahpred(item, grammar)


def test_recognizer_matches_oracle() -> None:
    """Seeded sweep: recognition, set contents and phases against the oracle."""
    for seed in range(200):
        # Arrange
        grammar = oracle.random_grammar(random.Random(seed), max_symbols=6)
        null_free = rewrite_mod.prepare_grammar(grammar)
        closure = recognizer_mod.precompute_prediction_closure(null_free.grammar)
        language = oracle.bf_language(grammar, 5)
        for tokens in _inputs(grammar.terminals, 5, 2000):
            # Act
            accepted, chart = recognizer_mod.recognize(null_free, tokens, closure)
            # Assert
            assert accepted == (tokens in language), (seed, tokens)
            reference = oracle.reference_chart(null_free.grammar, tokens)
            for earley_set, expected in zip(chart.sets, reference, strict=True):
                found = {
                    (chart.rules[idx], pos, origin)
                    for idx, pos, origin in earley_set.keys()
                }
                assert found == expected, (seed, tokens, earley_set.location)
                for key in earley_set.keys():
                    if earley_set.phase_of(key) == Phase.PREDICT:
                        assert key[1] == 0
                        assert chart.rules[key[0]].rhs


def test_acceptable_tokens_match_oracle() -> None:
    """Seeded sweep: frontier terminals equal brute-force continuations."""
    for seed in range(200):
        # Arrange
        grammar = oracle.random_grammar(
            random.Random(seed), max_symbols=6, all_productive=True
        )
        null_free = rewrite_mod.prepare_grammar(grammar)
        prefixes = oracle.bf_prefixes(grammar, 5)[grammar.root]
        for prefix in _inputs(grammar.terminals, 4, 2000):
            # Act
            _, chart = recognizer_mod.recognize(null_free, prefix)
            found = {sym.name for sym in recognizer_mod.acceptable_tokens(chart)}
            # Assert
            expected = {
                sym.name for sym in grammar.terminals if prefix + (sym.name,) in prefixes
            }
            assert found == expected, (seed, prefix)
        assert oracle.bf_acceptable_tokens(grammar, ()) == frozenset(
            sym for sym in grammar.terminals if (sym.name,) in prefixes
        )
