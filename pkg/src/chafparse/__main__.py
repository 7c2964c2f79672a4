"""Run the chafparse command line tools."""

import argparse
import logging
import pathlib
import sys
from typing import Any, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler

from chafparse import config
from chafparse.features import excel, reports
from chafparse.model import (
    ahfa_mod,
    evaluator_mod,
    grammar_mod,
    recognizer_mod,
    rewrite_mod,
)


EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ERROR = 2

console = Console(markup=False, highlight=False, soft_wrap=True)
err_console = Console(stderr=True, markup=False, highlight=False, soft_wrap=True)


def build_parser() -> argparse.ArgumentParser:
    """Define command line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c",
        "--config_path",
        help="Path to config file",
        type=pathlib.Path,
        default=None,
    )
    common.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug messages."
    )
    common.add_argument("grammar", type=pathlib.Path, help="Path to grammar file.")

    parser = argparse.ArgumentParser(prog="chafparse")
    parser.set_defaults(func=None)
    subparsers = parser.add_subparsers()

    classify_parser = subparsers.add_parser(
        "classify", parents=[common], help="Show the nullability class of every symbol."
    )
    classify_parser.set_defaults(func=classify_symbols)

    rewrite_parser = subparsers.add_parser(
        "rewrite", parents=[common], help="Show the rewritten grammar."
    )
    rewrite_parser.set_defaults(func=rewrite_grammar)
    rewrite_parser.add_argument(
        "-m",
        "--mode",
        choices=[str(mode) for mode in rewrite_mod.RewriteMode],
        default=str(rewrite_mod.RewriteMode.CHAF),
        help="Rewrite to apply. null-free is CHAF followed by nulling elimination.",
    )

    parse_parser = subparsers.add_parser(
        "parse", parents=[common], help="Recognize an input and show its parse."
    )
    parse_parser.set_defaults(func=parse_input)
    parse_parser.add_argument(
        "-i",
        "--input",
        required=True,
        help='Whitespace separated terminals, each optionally "name=value".',
    )
    parse_parser.add_argument(
        "-t", "--trace", action="store_true", help="Show the Earley sets."
    )
    parse_parser.add_argument(
        "--internal",
        action="store_true",
        help="Show rules and items of the rewritten grammar.",
    )
    parse_parser.add_argument(
        "--tree", action="store_true", help="Show the first parse tree and its value."
    )

    tokens_parser = subparsers.add_parser(
        "tokens", parents=[common], help="List the terminals acceptable after a prefix."
    )
    tokens_parser.set_defaults(func=list_tokens)
    tokens_parser.add_argument(
        "-p", "--prefix", default="", help="Whitespace separated terminals."
    )

    ahfa_parser = subparsers.add_parser(
        "ahfa", parents=[common], help="Build the AHFA of the grammar's NNF."
    )
    ahfa_parser.set_defaults(func=show_ahfa)
    ahfa_parser.add_argument(
        "--dot",
        nargs="?",
        const="-",
        default=None,
        help="Write a Graphviz file, to standard output if no path is given.",
    )
    ahfa_parser.add_argument(
        "--stats", action="store_true", help="Show state size statistics."
    )
    ahfa_parser.add_argument(
        "--csv", type=pathlib.Path, default=None, help="Write statistics as CSV."
    )
    ahfa_parser.add_argument(
        "--xlsx", type=pathlib.Path, default=None, help="Write statistics to Excel."
    )

    stats_parser = subparsers.add_parser(
        "stats", parents=[common], help="Show Earley item counts for an input."
    )
    stats_parser.set_defaults(func=chart_statistics)
    stats_parser.add_argument(
        "-i", "--input", required=True, help="Whitespace separated terminals."
    )
    stats_parser.add_argument(
        "--xlsx", type=pathlib.Path, default=None, help="Write statistics to Excel."
    )
    return parser


def read_tokens(text: str) -> list[tuple[str, Optional[str]]]:
    """Split command line input into (terminal name, value) pairs."""
    tokens: list[tuple[str, Optional[str]]] = []
    for word in text.split():
        name, sep, value = word.partition("=")
        tokens.append((name, value if sep else None))
    return tokens


def _print_lines(lines: Sequence[str]) -> None:
    for line in lines:
        console.print(line)


def _load(path: pathlib.Path) -> grammar_mod.Grammar:
    return grammar_mod.load_grammar(path)


def _rewrite(
    grammar: grammar_mod.Grammar, mode: rewrite_mod.RewriteMode
) -> rewrite_mod.RewrittenGrammar:
    if mode == rewrite_mod.RewriteMode.NULL_FREE:
        return rewrite_mod.prepare_grammar(grammar)
    if not grammar.is_augmented:
        grammar = grammar_mod.augment(grammar)
    return rewrite_mod.REWRITERS[mode](grammar, grammar_mod.classify(grammar))


def _run_chart(
    rewritten: rewrite_mod.RewrittenGrammar, text: str
) -> recognizer_mod.Chart:
    tokens: list[Any] = [
        name if value is None else (name, value) for name, value in read_tokens(text)
    ]
    _, chart = recognizer_mod.recognize(rewritten, tokens)
    return chart


def classify_symbols(args: argparse.Namespace) -> int:
    """Print the nullability class of each symbol."""
    grammar = _load(args.grammar)
    _print_lines(reports.classification_lines(grammar, grammar_mod.classify(grammar)))
    return EXIT_OK


def rewrite_grammar(args: argparse.Namespace) -> int:
    """Print the rewritten rules with their bindings."""
    rewritten = _rewrite(_load(args.grammar), rewrite_mod.RewriteMode(args.mode))
    _print_lines(reports.rule_dump_lines(rewritten))
    console.print(reports.rule_count_summary(rewritten))
    return EXIT_OK


def parse_input(args: argparse.Namespace) -> int:
    """Recognize the input, then optionally show the sets and the tree."""
    internal = args.internal or config.settings.show_internal
    chart = _run_chart(rewrite_mod.prepare_grammar(_load(args.grammar)), args.input)
    if args.trace:
        _print_lines(chart.trace_lines() if internal else reports.progress_lines(chart))
    if not chart.is_accepted:
        console.print("rejected")
        return EXIT_REJECTED
    console.print("accepted")
    if args.tree:
        tree = evaluator_mod.build_tree(chart)
        assert tree is not None
        _print_lines(reports.tree_lines(tree, chart, internal))
        value = evaluator_mod.evaluate(
            tree, evaluator_mod.collecting_semantics(), chart.rewritten, chart
        )
        console.print(f"value: {value!r}")
    return EXIT_OK


def list_tokens(args: argparse.Namespace) -> int:
    """Print the terminals that can follow the prefix."""
    chart = _run_chart(rewrite_mod.prepare_grammar(_load(args.grammar)), args.prefix)
    acceptable = sorted(sym.name for sym in recognizer_mod.acceptable_tokens(chart))
    console.print(" ".join(acceptable) if acceptable else "(none)")
    return EXIT_OK


def show_ahfa(args: argparse.Namespace) -> int:
    """Print the AHFA, its statistics, or write them to files."""
    rewritten = _rewrite(_load(args.grammar), rewrite_mod.RewriteMode.NNF)
    states, table = ahfa_mod.build_ahfa(rewritten)
    stats = ahfa_mod.ahfa_statistics(states)
    if args.dot == "-":
        console.print(reports.render_dot(states, table), end="")
    elif args.dot is not None:
        pathlib.Path(args.dot).write_text(reports.render_dot(states, table), encoding="utf-8")
    if args.csv is not None:
        args.csv.write_text(reports.ahfa_stats_csv(stats), encoding="utf-8")
    if args.xlsx is not None:
        excel.write(args.xlsx, states=states, ahfa_stats=stats)
    if args.stats:
        _print_lines(reports.ahfa_stats_lines(stats))
    elif args.dot is None:
        _print_lines(reports.ahfa_lines(states, table))
    return EXIT_OK


def chart_statistics(args: argparse.Namespace) -> int:
    """Print Earley item counts for the input."""
    chart = _run_chart(rewrite_mod.prepare_grammar(_load(args.grammar)), args.input)
    stats = recognizer_mod.chart_stats(chart)
    _print_lines(reports.chart_stats_lines(stats))
    console.print("accepted" if chart.is_accepted else "rejected")
    if args.xlsx is not None:
        excel.write(args.xlsx, chart_stats=stats)
    return EXIT_OK


def configure_logging() -> None:
    """Send log records to standard error through rich."""
    logging.basicConfig(
        level=config.settings.log_level.upper(),
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.func is None:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        config.settings.update_from_args(args)
        configure_logging()
        return args.func(args)
    except (
        config.ConfigError,
        grammar_mod.GrammarError,
        rewrite_mod.RewriteError,
        recognizer_mod.RecognizerError,
        ahfa_mod.AhfaError,
        evaluator_mod.EvaluationError,
        OSError,
    ) as err:
        err_console.print(f"error: {err}")
        return EXIT_ERROR


def main() -> None:
    """Entry point for the chafparse console script."""
    sys.exit(run())


if __name__ == "__main__":
    main()
