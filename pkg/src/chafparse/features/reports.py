"""Render grammars, charts, trees and automata as text for the command line."""

import csv
import io
from typing import Any, Optional, Sequence

from rich.console import Console
from rich.table import Table
from rich.text import Text

from chafparse import config
from chafparse.model import ahfa_mod, evaluator_mod, recognizer_mod
from chafparse.model.grammar_mod import Grammar, SymbolClass
from chafparse.model.rewrite_mod import RewrittenGrammar, Role


_TABLE_WIDTH = 1000


def classification_lines(grammar: Grammar, cls: SymbolClass) -> list[str]:
    """One line per symbol: name, terminal flag and nullability."""
    width = max((len(sym.name) for sym in grammar.symbols), default=0)
    lines = []
    for sym in grammar.symbols:
        kind = "terminal" if sym.is_terminal else "nonterminal"
        lines.append(f"{sym.name:<{width}}  {kind:<11}  {cls.kind(sym)}")
    return lines


def _markup_text(rewritten: RewrittenGrammar, rule: Any) -> str:
    markup = rewritten.markup.get(rule)
    if markup is None or not markup.insertions:
        return "-"
    return ",".join(f"({pos},{sym})" for pos, sym in markup.insertions)


def rule_dump_lines(rewritten: RewrittenGrammar) -> list[str]:
    """Rewritten rules with role, pre-rewrite rule and nulling markup."""
    lines = []
    for rule in rewritten.grammar.rules:
        binding = rewritten.bindings[rule]
        pre = "-" if binding.pre_rewrite_rule is None else str(binding.pre_rewrite_rule)
        lines.append(
            f"{rule}   # role={binding.role} pre={pre}"
            f" markup={_markup_text(rewritten, rule)}"
        )
    return lines


def rule_count_summary(rewritten: RewrittenGrammar) -> str:
    counts = rewritten.role_counts()
    parts = [f"{role}={counts[role]}" for role in Role if counts[role]]
    return (
        f"{len(rewritten.grammar.rules)} rules"
        f" (from {len(rewritten.original.rules)}): {' '.join(parts)}"
        f"; nullable start: {'yes' if rewritten.nullable_start else 'no'}"
    )


def progress_lines(chart: recognizer_mod.Chart) -> list[str]:
    """Progress reports for every built set, in pre-rewrite terms."""
    lines = []
    for location in range(len(chart.sets)):
        for dotted, origin in recognizer_mod.progress_report(chart, location):
            lines.append(f"set={location} item={dotted} origin={origin}")
    return lines


def _tree_semantics() -> evaluator_mod.Semantics:
    """Semantics that rebuild the tree in pre-rewrite shape."""
    return evaluator_mod.Semantics(
        default_rule=lambda context, *children: (
            "rule",
            str(context.rule),
            context.span,
            children,
        ),
        default_token=lambda context, value: (
            "token",
            context.symbol.name,
            value,
        ),
        default_nulled=lambda context: ("nulled", context.symbol.name),
    )


def _pre_rewrite_lines(node: tuple, depth: int, lines: list[str]) -> None:
    indent = "  " * depth
    match node:
        case ("rule", rule_text, (start, end), children):
            lines.append(f"{indent}rule {rule_text} span=[{start},{end})")
            for child in children:
                _pre_rewrite_lines(child, depth + 1, lines)
        case ("token", name, value):
            lines.append(f"{indent}token {name}={value}")
        case ("nulled", name):
            lines.append(f"{indent}nulled {name}")


def _internal_lines(node: evaluator_mod.ParseNode, depth: int, lines: list[str]) -> None:
    indent = "  " * depth
    start, end = node.span
    if node.kind == evaluator_mod.NodeKind.RULE:
        lines.append(f"{indent}rule {node.rule} span=[{start},{end})")
        for child in node.children:
            _internal_lines(child, depth + 1, lines)
    elif node.kind == evaluator_mod.NodeKind.TERMINAL:
        lines.append(f"{indent}token {node.symbol}={node.value}")
    else:
        lines.append(f"{indent}nulled {node.symbol}")


def tree_lines(
    tree: evaluator_mod.ParseNode,
    chart: recognizer_mod.Chart,
    internal: Optional[bool] = None,
) -> list[str]:
    """Indented tree dump, in pre-rewrite terms unless `internal`."""
    internal = config.settings.show_internal if internal is None else internal
    lines: list[str] = []
    if internal:
        _internal_lines(tree, 0, lines)
    else:
        rebuilt = evaluator_mod.evaluate(tree, _tree_semantics(), chart.rewritten, chart)
        _pre_rewrite_lines(rebuilt, 0, lines)
    return lines


def chart_stats_lines(stats: recognizer_mod.ChartStats) -> list[str]:
    lines = [f"set={idx} items={count}" for idx, count in enumerate(stats.items_per_set)]
    lines.append(f"total items: {stats.total_items}")
    lines.append(
        f"add attempts: {stats.attempts} (duplicates: {stats.duplicate_attempts})"
    )
    lines.append(
        "by phase: "
        + " ".join(f"{phase}={count}" for phase, count in stats.phase_counts.items())
    )
    return lines


def _label_text(label: ahfa_mod.Label) -> str:
    return "eps" if label == ahfa_mod.EPSILON else str(label)


def ahfa_lines(
    states: Sequence[ahfa_mod.AhfaState], table: ahfa_mod.GotoTable
) -> list[str]:
    """States with their dotted rules, followed by the transitions."""
    lines = []
    for state in states:
        lines.append(f"{state.label} ({state.kind})")
        lines.extend(f"  {dotted}" for dotted in state.sorted_items())
    for src, label, dst in table.edges():
        lines.append(f"{states[src].label} --{_label_text(label)}--> {states[dst].label}")
    return lines


def render_dot(
    states: Sequence[ahfa_mod.AhfaState], table: ahfa_mod.GotoTable
) -> str:
    """Graphviz description of the AHFA."""
    out = io.StringIO()
    out.write("digraph ahfa {\n")
    out.write("  node [shape=box, fontname=monospace];\n")
    for state in states:
        items = "\\l".join(str(dotted).replace('"', '\\"') for dotted in state.sorted_items())
        style = ", style=dashed" if state.kind == ahfa_mod.StateKind.PREDICTED else ""
        out.write(f'  {state.id} [label="{state.label}\\n{items}\\l"{style}];\n')
    for src, label, dst in table.edges():
        text = _label_text(label).replace('"', '\\"')
        out.write(f'  {src} -> {dst} [label="{text}"];\n')
    out.write("}\n")
    return out.getvalue()


def ahfa_stats_rows(stats: ahfa_mod.AhfaStats) -> list[dict[str, Any]]:
    """Flat table of the AHFA statistics, one row per measurement."""
    decimals = config.settings.stats_decimals
    rows: list[dict[str, Any]] = []
    for kind, kind_stats in stats.by_kind.items():
        rows.append({"table": "states", "kind": kind, "key": "count", "value": kind_stats.count})
        rows.append(
            {
                "table": "states",
                "kind": kind,
                "key": "mean size",
                "value": f"{kind_stats.mean_size:.{decimals}f}",
            }
        )
        rows.append(
            {
                "table": "states",
                "kind": kind,
                "key": "mean square size",
                "value": f"{kind_stats.mean_square_size:.{decimals}f}",
            }
        )
        for size, count in kind_stats.histogram.items():
            rows.append(
                {"table": "size histogram", "kind": kind, "key": size, "value": count}
            )
    for completed, count in stats.completed_lhs_histogram.items():
        rows.append(
            {"table": "completed lhs", "kind": "all", "key": completed, "value": count}
        )
    for dotted, state_ids in stats.duplicated.items():
        rows.append(
            {
                "table": "duplicated",
                "kind": "all",
                "key": str(dotted),
                "value": " ".join(str(state_id) for state_id in state_ids),
            }
        )
    return rows


def ahfa_stats_lines(stats: ahfa_mod.AhfaStats) -> list[str]:
    """Aligned text tables of the AHFA statistics."""
    columns = ("table", "kind", "key", "value")
    table = Table(*columns, box=None, pad_edge=False, show_edge=False)
    for row in ahfa_stats_rows(stats):
        table.add_row(*(Text(str(row[column])) for column in columns))
    out = io.StringIO()
    Console(file=out, width=_TABLE_WIDTH, color_system=None, highlight=False).print(table)
    lines = [line.rstrip() for line in out.getvalue().splitlines()]
    lines.append(
        f"dotted rules: {stats.total_items} in states, {stats.distinct_items} distinct"
    )
    return lines


def ahfa_stats_csv(stats: ahfa_mod.AhfaStats) -> str:
    """AHFA statistics as CSV text."""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=["table", "kind", "key", "value"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(ahfa_stats_rows(stats))
    return out.getvalue()
