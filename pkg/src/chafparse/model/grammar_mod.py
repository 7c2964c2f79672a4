"""Grammar data model, text-format ingestion, augmentation and classification.

## Grammar file format
UTF-8 text. One `start: <name>` line, rules written as
`<lhs> ::= <sym> <sym> ...` (an empty right-hand side is an empty rule),
`#` starts a comment and blank lines are ignored. Terminals are the symbols
that never appear on a left-hand side.
"""

import collections
import dataclasses
import enum
import functools
import logging
import pathlib
from typing import Callable, Iterable, Mapping, Optional

from chafparse import config


logger = logging.getLogger(__name__)

RULE_ARROW = "::="
START_KEYWORD = "start:"
EPSILON = "ε"


class GrammarError(Exception):
    """Raised for malformed grammar sources or invalid grammar objects."""

    class ErrorType(enum.Enum):
        SYNTAX = 1
        DUPLICATE_START = 2
        UNDEFINED_START = 3
        EMPTY_GRAMMAR = 4
        ALREADY_AUGMENTED = 5
        NOT_AUGMENTED = 6
        DUPLICATE_RULE = 7
        INVALID_SYMBOL = 8

    error_type: ErrorType
    line: Optional[int]

    def __init__(
        self, message: str, error_type: ErrorType, line: Optional[int] = None
    ) -> None:
        """Set error type and the offending line number, if any."""
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.error_type = error_type
        self.line = line


@dataclasses.dataclass(frozen=True, order=True)
class Symbol:
    """A grammar symbol. The empty string ε is not a symbol."""

    name: str
    is_terminal: bool = False

    def __post_init__(self) -> None:
        if not self.name or self.name == EPSILON or self.name.isspace():
            raise GrammarError(
                f"{self.name!r} is not a valid symbol name.",
                GrammarError.ErrorType.INVALID_SYMBOL,
            )

    @property
    def id(self) -> str:
        """Identifier that is unique within a grammar."""
        return self.name

    def __str__(self) -> str:
        return self.name


@dataclasses.dataclass(frozen=True)
class Rule:
    """A rule: left-hand side and a (possibly empty) right-hand side.

    `nulled` is the nulling markup of rules produced by nulling-symbol
    elimination: (position, symbol) pairs, positions counted in the
    nulling-present right-hand side. It takes part in rule equality, so two
    rules with the same symbols but different markup are different rules.
    """

    lhs: Symbol
    rhs: tuple[Symbol, ...] = ()
    nulled: tuple[tuple[int, Symbol], ...] = ()

    def __post_init__(self) -> None:
        if self.lhs.is_terminal:
            raise GrammarError(
                f"Terminal {self.lhs} cannot be on the left-hand side of a rule.",
                GrammarError.ErrorType.INVALID_SYMBOL,
            )

    def __len__(self) -> int:
        return len(self.rhs)

    def rhs_text(self) -> str:
        return " ".join(sym.name for sym in self.rhs)

    def __str__(self) -> str:
        rhs = self.rhs_text()
        return f"{self.lhs} {RULE_ARROW} {rhs}" if rhs else f"{self.lhs} {RULE_ARROW}"


@dataclasses.dataclass(frozen=True)
class Grammar:
    """Vocabulary, rules, start symbol and (once augmented) accept symbol.

    Symbols are kept in declaration order and rules in source order, so every
    derived table iterates deterministically.
    """

    symbols: tuple[Symbol, ...]
    rules: tuple[Rule, ...]
    start: Symbol
    accept: Optional[Symbol] = None

    def __post_init__(self) -> None:
        names = collections.Counter(sym.name for sym in self.symbols)
        dupes = [name for name, count in names.items() if count > 1]
        if dupes:
            raise GrammarError(
                f"Symbol names are not unique: {', '.join(dupes)}",
                GrammarError.ErrorType.INVALID_SYMBOL,
            )
        vocabulary = set(self.symbols)
        if self.start not in vocabulary or self.start.is_terminal:
            raise GrammarError(
                f"Start symbol {self.start} is not a nonterminal of the grammar.",
                GrammarError.ErrorType.UNDEFINED_START,
            )
        seen: set[Rule] = set()
        for rule in self.rules:
            if rule in seen:
                raise GrammarError(
                    f"Duplicate rule {rule}", GrammarError.ErrorType.DUPLICATE_RULE
                )
            seen.add(rule)
            for sym in (rule.lhs, *rule.rhs):
                if sym not in vocabulary:
                    raise GrammarError(
                        f"Rule {rule} uses {sym!r}, which is not in the vocabulary.",
                        GrammarError.ErrorType.INVALID_SYMBOL,
                    )
        if self.accept is not None:
            if self.accept not in vocabulary or self.accept.is_terminal:
                raise GrammarError(
                    f"Accept symbol {self.accept} is not a nonterminal.",
                    GrammarError.ErrorType.INVALID_SYMBOL,
                )
            if len(self.rules_for(self.accept)) > 1:
                raise GrammarError(
                    f"More than one rule for accept symbol {self.accept}.",
                    GrammarError.ErrorType.DUPLICATE_RULE,
                )
            if any(self.accept in rule.rhs for rule in self.rules):
                raise GrammarError(
                    f"Accept symbol {self.accept} appears on a right-hand side.",
                    GrammarError.ErrorType.INVALID_SYMBOL,
                )

    @functools.cached_property
    def _rules_by_lhs(self) -> Mapping[Symbol, tuple[Rule, ...]]:
        by_lhs: dict[Symbol, list[Rule]] = {sym: [] for sym in self.nonterminals}
        for rule in self.rules:
            by_lhs[rule.lhs].append(rule)
        return {sym: tuple(rules) for sym, rules in by_lhs.items()}

    @functools.cached_property
    def _by_name(self) -> Mapping[str, Symbol]:
        return {sym.name: sym for sym in self.symbols}

    @functools.cached_property
    def rule_index(self) -> Mapping[Rule, int]:
        """Position of each rule in `rules`."""
        return {rule: idx for idx, rule in enumerate(self.rules)}

    @property
    def vocabulary(self) -> frozenset[Symbol]:
        return frozenset(self.symbols)

    @functools.cached_property
    def terminals(self) -> tuple[Symbol, ...]:
        return tuple(sym for sym in self.symbols if sym.is_terminal)

    @functools.cached_property
    def nonterminals(self) -> tuple[Symbol, ...]:
        return tuple(sym for sym in self.symbols if not sym.is_terminal)

    @property
    def is_augmented(self) -> bool:
        return self.accept is not None

    @property
    def root(self) -> Symbol:
        """Accept symbol for augmented grammars, otherwise the start symbol."""
        return self.accept if self.accept is not None else self.start

    @property
    def accept_rule(self) -> Optional[Rule]:
        """The unique rule ⟨accept ::= start⟩, if present."""
        if self.accept is None:
            return None
        rules = self.rules_for(self.accept)
        return rules[0] if rules else None

    def rules_for(self, symbol: Symbol) -> tuple[Rule, ...]:
        """Rules with `symbol` on the left-hand side."""
        return self._rules_by_lhs.get(symbol, ())

    def symbol(self, name: str) -> Symbol:
        """Look up a symbol by name."""
        try:
            return self._by_name[name]
        except KeyError:
            raise GrammarError(
                f"Unknown symbol {name}", GrammarError.ErrorType.INVALID_SYMBOL
            ) from None

    def has_symbol(self, name: str) -> bool:
        return name in self._by_name

    def __str__(self) -> str:
        return "\n".join(str(rule) for rule in self.rules)


class NullKind(enum.StrEnum):
    """Nullability of a symbol or rule."""

    NON_NULLABLE = "non-nullable"
    PROPER_NULLABLE = "proper-nullable"
    NULLING = "nulling"


@dataclasses.dataclass(frozen=True)
class SymbolClass:
    """Per-symbol and per-rule nullability tags."""

    symbols: Mapping[Symbol, NullKind]
    rules: Mapping[Rule, NullKind]
    productive: frozenset[Symbol]

    def kind(self, symbol: Symbol) -> NullKind:
        return self.symbols.get(symbol, NullKind.NON_NULLABLE)

    def is_nullable(self, symbol: Symbol) -> bool:
        return self.kind(symbol) != NullKind.NON_NULLABLE

    def is_nulling(self, symbol: Symbol) -> bool:
        return self.kind(symbol) == NullKind.NULLING

    def is_proper_nullable(self, symbol: Symbol) -> bool:
        return self.kind(symbol) == NullKind.PROPER_NULLABLE

    def nullable_symbols(self) -> tuple[Symbol, ...]:
        return tuple(
            sym for sym, kind in self.symbols.items() if kind != NullKind.NON_NULLABLE
        )

    def rule_kind(self, rule: Rule) -> NullKind:
        return self.rules[rule]


def parse_grammar(text: str) -> Grammar:
    """Parse grammar source text into an unaugmented grammar."""
    start_name: Optional[str] = None
    start_line: Optional[int] = None
    raw_rules: list[tuple[int, str, list[str]]] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) >= 2 and tokens[1] == RULE_ARROW:
            if RULE_ARROW in tokens[2:]:
                raise GrammarError(
                    f"Unexpected {RULE_ARROW} in right-hand side",
                    GrammarError.ErrorType.SYNTAX,
                    line_number,
                )
            raw_rules.append((line_number, tokens[0], tokens[2:]))
        elif tokens[0].startswith(START_KEYWORD):
            name_tokens = [tokens[0][len(START_KEYWORD) :], *tokens[1:]]
            name_tokens = [tok for tok in name_tokens if tok]
            if len(name_tokens) != 1:
                raise GrammarError(
                    "Start declaration must name exactly one symbol",
                    GrammarError.ErrorType.SYNTAX,
                    line_number,
                )
            if start_name is not None:
                raise GrammarError(
                    f"Duplicate start declaration (first on line {start_line})",
                    GrammarError.ErrorType.DUPLICATE_START,
                    line_number,
                )
            start_name, start_line = name_tokens[0], line_number
        else:
            raise GrammarError(
                f"Expected a rule or a start declaration, got {line!r}",
                GrammarError.ErrorType.SYNTAX,
                line_number,
            )
    if start_name is None and not raw_rules:
        raise GrammarError("Grammar is empty", GrammarError.ErrorType.EMPTY_GRAMMAR)
    if start_name is None:
        raise GrammarError(
            "Grammar has no start declaration", GrammarError.ErrorType.UNDEFINED_START
        )

    lhs_names = {lhs for _, lhs, _ in raw_rules}
    if start_name not in lhs_names:
        raise GrammarError(
            f"Start symbol {start_name} has no rules",
            GrammarError.ErrorType.UNDEFINED_START,
            start_line,
        )
    order: dict[str, None] = {}
    for _, lhs, rhs in raw_rules:
        for name in (lhs, *rhs):
            order.setdefault(name)
    try:
        symbols = {name: Symbol(name, name not in lhs_names) for name in order}
    except GrammarError as err:
        raise GrammarError(str(err), GrammarError.ErrorType.INVALID_SYMBOL) from err

    rules: list[Rule] = []
    seen: set[Rule] = set()
    for line_number, lhs, rhs in raw_rules:
        rule = Rule(symbols[lhs], tuple(symbols[name] for name in rhs))
        if rule in seen:
            raise GrammarError(
                f"Duplicate rule {rule}",
                GrammarError.ErrorType.DUPLICATE_RULE,
                line_number,
            )
        seen.add(rule)
        rules.append(rule)
    grammar = Grammar(tuple(symbols.values()), tuple(rules), symbols[start_name])
    logger.debug(
        "Parsed grammar: %d symbols, %d rules", len(grammar.symbols), len(rules)
    )
    return grammar


def load_grammar(path: pathlib.Path) -> Grammar:
    """Read and parse a grammar file."""
    with open(path, encoding="utf-8") as grammar_file:
        return parse_grammar(grammar_file.read())


def fresh_name(base: str, taken: Iterable[str], suffix: str) -> str:
    """Append `suffix` to `base` until the name is not taken."""
    taken = set(taken)
    name = base + suffix
    while name in taken:
        name += suffix
    return name


def augment(grammar: Grammar) -> Grammar:
    """Add a fresh accept symbol and the accept rule ⟨accept ::= start⟩."""
    if grammar.is_augmented:
        raise GrammarError(
            "Grammar is already augmented", GrammarError.ErrorType.ALREADY_AUGMENTED
        )
    accept = Symbol(
        fresh_name(
            grammar.start.name,
            (sym.name for sym in grammar.symbols),
            config.settings.accept_suffix,
        )
    )
    return Grammar(
        symbols=(accept, *grammar.symbols),
        rules=(Rule(accept, (grammar.start,)), *grammar.rules),
        start=grammar.start,
        accept=accept,
    )


def _fixed_point(
    grammar: Grammar, holds: Callable[[Rule, set[Symbol]], bool]
) -> set[Symbol]:
    """Least set of symbols closed under `holds` for some rule."""
    found: set[Symbol] = set()
    changed = True
    while changed:
        changed = False
        for rule in grammar.rules:
            if rule.lhs not in found and holds(rule, found):
                found.add(rule.lhs)
                changed = True
    return found


def classify(grammar: Grammar) -> SymbolClass:
    """Tag every symbol and rule as non-nullable, proper nullable or nulling.

    A symbol is nulling when it is nullable and derives no string that
    contains a terminal.
    """
    nullable = _fixed_point(
        grammar, lambda rule, found: all(sym in found for sym in rule.rhs)
    )
    productive = _fixed_point(
        grammar,
        lambda rule, found: all(sym.is_terminal or sym in found for sym in rule.rhs),
    )
    productive |= set(grammar.terminals)
    nonempty = _fixed_point(
        grammar,
        lambda rule, found: all(sym in productive for sym in rule.rhs)
        and any(sym.is_terminal or sym in found for sym in rule.rhs),
    )
    symbols: dict[Symbol, NullKind] = {}
    for sym in grammar.symbols:
        if sym not in nullable:
            symbols[sym] = NullKind.NON_NULLABLE
        elif sym in nonempty:
            symbols[sym] = NullKind.PROPER_NULLABLE
        else:
            symbols[sym] = NullKind.NULLING
    rules: dict[Rule, NullKind] = {}
    for rule in grammar.rules:
        if all(symbols[sym] == NullKind.NULLING for sym in rule.rhs):
            rules[rule] = NullKind.NULLING
        elif all(sym in nullable for sym in rule.rhs):
            rules[rule] = NullKind.PROPER_NULLABLE
        else:
            rules[rule] = NullKind.NON_NULLABLE
    logger.debug(
        "Classified %d symbols: %d nullable, %d nulling",
        len(symbols),
        len(nullable),
        sum(1 for kind in symbols.values() if kind == NullKind.NULLING),
    )
    return SymbolClass(symbols, rules, frozenset(productive))
