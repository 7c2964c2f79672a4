"""Test text, Graphviz and CSV rendering."""

from chafparse import config
from chafparse.features import reports
from chafparse.model import ahfa_mod, evaluator_mod, grammar_mod, recognizer_mod, rewrite_mod


def _prefix_ahfa(
    grammar: grammar_mod.Grammar,
) -> tuple[list[ahfa_mod.AhfaState], ahfa_mod.GotoTable]:
    return ahfa_mod.build_ahfa(rewrite_mod.nnf_rewrite(grammar))


def test_classification_lines(quad_grammar: grammar_mod.Grammar) -> None:
    """Names are padded to a common width."""
    # Act
    lines = reports.classification_lines(quad_grammar, grammar_mod.classify(quad_grammar))
    # Assert
    assert lines == [
        "S  nonterminal  proper-nullable",
        "A  nonterminal  proper-nullable",
        "a  terminal     non-nullable",
    ]


def test_rule_dump(quad_grammar: grammar_mod.Grammar) -> None:
    """Each rewritten rule shows its role, pre-rewrite rule and markup."""
    # Arrange
    rewritten = rewrite_mod.prepare_grammar(quad_grammar)
    # Act
    lines = reports.rule_dump_lines(rewritten)
    # Assert
    assert "S2 ::= A   # role=chaf-tail pre=S ::= A A A A markup=(0,Ae)" in lines
    assert "A ::= a   # role=verbatim pre=A ::= a markup=-" in lines


def test_render_dot(prefix_augmented: grammar_mod.Grammar) -> None:
    """Predicted states are dashed and ε edges are labelled eps."""
    # Arrange
    states, table = _prefix_ahfa(prefix_augmented)
    # Act
    dot = reports.render_dot(states, table)
    # Assert
    assert dot.startswith("digraph ahfa {\n")
    assert '  1 [label="P1\\nA ::= • B\\l' in dot
    assert dot.count("style=dashed") == 2
    assert '  0 -> 1 [label="eps"];' in dot
    assert '  0 -> 2 [label="S"];' in dot


def test_stats_csv(prefix_augmented: grammar_mod.Grammar) -> None:
    """One CSV row per measurement, rounded to the configured decimals."""
    # Arrange
    states, _ = _prefix_ahfa(prefix_augmented)
    config.settings.stats_decimals = 2
    # Act
    text = reports.ahfa_stats_csv(ahfa_mod.ahfa_statistics(states))
    # Assert
    lines = text.splitlines()
    assert lines[0] == "table,kind,key,value"
    assert "states,predicted,mean size,2.50" in lines
    assert "states,predicted,mean square size,8.50" in lines
    assert "size histogram,confirmed,1,8" in lines
    assert "completed lhs,all,0,6" in lines
    assert "duplicated,all,B ::= x • b,5 10" in lines


def test_stats_table(prefix_augmented: grammar_mod.Grammar) -> None:
    """The statistics table has one aligned line per CSV row."""
    # Arrange
    states, _ = _prefix_ahfa(prefix_augmented)
    stats = ahfa_mod.ahfa_statistics(states)
    config.settings.stats_decimals = 2
    # Act
    lines = reports.ahfa_stats_lines(stats)
    # Assert
    assert lines[0].split() == ["table", "kind", "key", "value"]
    assert len(lines) == len(reports.ahfa_stats_rows(stats)) + 2
    assert ["states", "predicted", "mean", "size", "2.50"] in [line.split() for line in lines]
    value_column = lines[0].index("value")
    for line in lines[1:-1]:
        assert line[value_column - 1] == " "
        assert line[value_column] != " "
    assert all(not line.endswith(" ") for line in lines)
    assert lines[-1] == "dotted rules: 15 in states, 13 distinct"


def test_tree_lines(quad_grammar: grammar_mod.Grammar) -> None:
    """Trees are shown with nulled children restored, or as parsed."""
    # Arrange
    rewritten = rewrite_mod.prepare_grammar(quad_grammar)
    _, chart = recognizer_mod.recognize(rewritten, ["a", "a", "a"])
    tree = evaluator_mod.build_tree(chart)
    assert tree is not None
    # Act
    pre_rewrite = reports.tree_lines(tree, chart, internal=False)
    internal = reports.tree_lines(tree, chart, internal=True)
    # Assert
    assert pre_rewrite[0] == "rule S ::= A A A A span=[0,3)"
    assert len(pre_rewrite) == 1 + 3 * 2 + 1
    assert sum(line == "  nulled A" for line in pre_rewrite) == 1
    assert internal[0] == "rule S′ ::= S span=[0,3)"
    assert "nulled" not in "\n".join(internal)


def test_chart_stats_lines(prefix_grammar: grammar_mod.Grammar) -> None:
    """Per-set counts, then totals."""
    # Arrange
    rewritten = rewrite_mod.prepare_grammar(prefix_grammar)
    _, chart = recognizer_mod.recognize(rewritten, ["x", "a", "x", "b"])
    # Act
    lines = reports.chart_stats_lines(recognizer_mod.chart_stats(chart))
    # Assert
    assert lines[:5] == [
        "set=0 items=5",
        "set=1 items=2",
        "set=2 items=3",
        "set=3 items=1",
        "set=4 items=3",
    ]
    assert lines[5] == "total items: 14"
    assert lines[-1] == "by phase: seed=1 scan=5 reduce=3 predict=5"
