"""The Earley recognizer.

Works on nulling-free grammars only, so each Earley set is built in three
phases: scanning, reduction to a fixed point, then prediction from a
precomputed closure. Sets are final once built, so queries against any set
up to the frontier can be made at any later time.

Items are stored as (rule index, dot position, origin) keys; EarleyItem and
DottedRule objects are built on demand for callers.
"""

import collections
import dataclasses
import enum
import logging
from typing import Any, Iterator, Mapping, Optional, Sequence

from chafparse.model.grammar_mod import Grammar, Rule, Symbol, classify
from chafparse.model.rewrite_mod import RewrittenGrammar


logger = logging.getLogger(__name__)

ItemKey = tuple[int, int, int]
Token = tuple[Symbol, Any]


class RecognizerError(Exception):
    """Raised for unusable grammars and invalid input tokens."""


class Phase(enum.StrEnum):
    """How an item entered its Earley set."""

    SEED = "seed"
    SCAN = "scan"
    REDUCE = "reduce"
    PREDICT = "predict"


@dataclasses.dataclass(frozen=True)
class DottedRule:
    """A rule with a dot position."""

    rule: Rule
    pos: int

    def __post_init__(self) -> None:
        if not 0 <= self.pos <= len(self.rule.rhs):
            raise RecognizerError(f"Dot position {self.pos} out of range for {self.rule}")

    @property
    def is_completion(self) -> bool:
        return self.pos == len(self.rule.rhs)

    def __str__(self) -> str:
        before = [sym.name for sym in self.rule.rhs[: self.pos]]
        after = [sym.name for sym in self.rule.rhs[self.pos :]]
        return " ".join([self.rule.lhs.name, "::=", *before, "•", *after])


def postdot(dotted: DottedRule) -> Optional[Symbol]:
    """Symbol after the dot, or None for a completion."""
    if dotted.is_completion:
        return None
    return dotted.rule.rhs[dotted.pos]


def next_dr(dotted: DottedRule) -> Optional[DottedRule]:
    """The dotted rule with the dot moved one symbol right."""
    if dotted.is_completion:
        return None
    return DottedRule(dotted.rule, dotted.pos + 1)


@dataclasses.dataclass(frozen=True)
class EarleyItem:
    """Dotted rule, origin and current location."""

    dr: DottedRule
    origin: int
    current: int

    def __post_init__(self) -> None:
        if not 0 <= self.origin <= self.current:
            raise RecognizerError(f"Origin {self.origin} after current {self.current}")

    def __str__(self) -> str:
        return f"[{self.dr}, {self.origin}, {self.current}]"


def opred(item: EarleyItem, grammar: Grammar) -> frozenset[EarleyItem]:
    """One-step prediction: dot-0 items for rules of the postdot symbol."""
    symbol = postdot(item.dr)
    if symbol is None or symbol.is_terminal:
        return frozenset()
    return frozenset(
        EarleyItem(DottedRule(rule, 0), item.current, item.current)
        for rule in grammar.rules_for(symbol)
    )


def ahpred(item: EarleyItem, grammar: Grammar) -> frozenset[EarleyItem]:
    """Transitive closure of one-step prediction, starting from `item`."""
    predicted = set(opred(item, grammar))
    newest = set(predicted)
    while newest:
        found = set()
        for predicted_item in newest:
            found |= opred(predicted_item, grammar)
        newest = found - predicted
        predicted |= newest
    return frozenset(predicted)


def iter_bits(mask: int) -> Iterator[int]:
    """Indexes of set bits, lowest first."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclasses.dataclass(frozen=True)
class PredictionClosure:
    """Per-nonterminal bit mask of the rules predicted, transitively."""

    rules: tuple[Rule, ...]
    masks: Mapping[Symbol, int]

    def mask(self, symbol: Symbol) -> int:
        return self.masks.get(symbol, 0)

    def rules_for(self, symbol: Symbol) -> tuple[Rule, ...]:
        return tuple(self.rules[idx] for idx in iter_bits(self.mask(symbol)))

    def predicted_items(self, item: EarleyItem) -> frozenset[EarleyItem]:
        """Closure-based counterpart of ahpred."""
        symbol = postdot(item.dr)
        if symbol is None:
            return frozenset()
        return frozenset(
            EarleyItem(DottedRule(rule, 0), item.current, item.current)
            for rule in self.rules_for(symbol)
        )


def precompute_prediction_closure(grammar: Grammar) -> PredictionClosure:
    """Closure of the first-symbol relation over rule bit masks."""
    if any(not rule.rhs for rule in grammar.rules):
        raise RecognizerError("Prediction closures need a grammar with no empty rules")
    rules = grammar.rules
    masks: dict[Symbol, int] = {}
    for sym in grammar.nonterminals:
        mask = 0
        for rule in grammar.rules_for(sym):
            mask |= 1 << grammar.rule_index[rule]
        masks[sym] = mask
    first = [rule.rhs[0] for rule in rules]
    changed = True
    while changed:
        changed = False
        for sym, mask in masks.items():
            closed = mask
            for idx in iter_bits(mask):
                closed |= masks.get(first[idx], 0)
            if closed != mask:
                masks[sym] = closed
                changed = True
    logger.debug("Prediction closure over %d rules", len(rules))
    return PredictionClosure(rules, masks)


class EarleySet:
    """Items sharing one current location, in insertion order."""

    def __init__(self, location: int, rules: tuple[Rule, ...]) -> None:
        self.location = location
        self._rules = rules
        self._phases: dict[ItemKey, Phase] = {}
        self._by_postdot: dict[Symbol, list[ItemKey]] = collections.defaultdict(list)

    def add(self, key: ItemKey, phase: Phase) -> bool:
        """Add an item, returning False if it was already present."""
        if key in self._phases:
            return False
        self._phases[key] = phase
        rule_idx, pos, _ = key
        rhs = self._rules[rule_idx].rhs
        if pos < len(rhs):
            self._by_postdot[rhs[pos]].append(key)
        return True

    def __contains__(self, key: object) -> bool:
        return key in self._phases

    def __len__(self) -> int:
        return len(self._phases)

    def keys(self) -> tuple[ItemKey, ...]:
        return tuple(self._phases)

    def with_postdot(self, symbol: Symbol) -> Sequence[ItemKey]:
        return self._by_postdot.get(symbol, ())

    def postdot_symbols(self) -> tuple[Symbol, ...]:
        return tuple(sym for sym, keys in self._by_postdot.items() if keys)

    def phase_of(self, item: ItemKey | EarleyItem) -> Phase:
        if isinstance(item, EarleyItem):
            item = (self._rule_index(item.dr.rule), item.dr.pos, item.origin)
        return self._phases[item]

    def _rule_index(self, rule: Rule) -> int:
        return self._rules.index(rule)

    def item(self, key: ItemKey) -> EarleyItem:
        rule_idx, pos, origin = key
        return EarleyItem(DottedRule(self._rules[rule_idx], pos), origin, self.location)

    @property
    def items(self) -> tuple[EarleyItem, ...]:
        return tuple(self.item(key) for key in self._phases)


@dataclasses.dataclass(frozen=True)
class ChartStats:
    """Earley item counts for a chart."""

    items_per_set: tuple[int, ...]
    total_items: int
    attempts: int
    duplicate_attempts: int
    phase_counts: Mapping[Phase, int]


class Chart:
    """Earley sets for one input, built one location at a time."""

    def __init__(
        self,
        rewritten: RewrittenGrammar,
        closure: Optional[PredictionClosure] = None,
        input_length: Optional[int] = None,
    ) -> None:
        """Check that the grammar is nulling-free and set up the closure."""
        grammar = rewritten.grammar
        nullable = classify(grammar).nullable_symbols()
        if nullable:
            raise RecognizerError(
                "Grammar has nullable symbols; eliminate them first: "
                + ", ".join(sym.name for sym in nullable)
            )
        self.rewritten = rewritten
        self.grammar = grammar
        self.rules = grammar.rules
        self.closure = closure or precompute_prediction_closure(grammar)
        self.input_length = input_length
        self.sets: list[EarleySet] = []
        self.tokens: list[Token] = []
        self.attempts = 0
        self.duplicate_attempts = 0
        accept_rule = grammar.accept_rule
        self._accept_idx = (
            None if accept_rule is None else grammar.rule_index[accept_rule]
        )

    @property
    def frontier(self) -> Optional[int]:
        """Location of the last completed set."""
        return len(self.sets) - 1 if self.sets else None

    def _add(self, earley_set: EarleySet, key: ItemKey, phase: Phase) -> bool:
        self.attempts += 1
        added = earley_set.add(key, phase)
        if not added:
            self.duplicate_attempts += 1
        return added

    def _predict(self, earley_set: EarleySet) -> None:
        """Phase three: add the closure of every nonterminal postdot symbol."""
        mask = 0
        for sym in earley_set.postdot_symbols():
            mask |= self.closure.mask(sym)
        location = earley_set.location
        for rule_idx in iter_bits(mask):
            self._add(earley_set, (rule_idx, 0, location), Phase.PREDICT)

    def initialize(self) -> None:
        """Build Earley set 0 from the accept rule's initial dotted rule."""
        if self.sets:
            raise RecognizerError("Chart is already initialized")
        earley_set = EarleySet(0, self.rules)
        self.sets.append(earley_set)
        if self._accept_idx is not None:
            self._add(earley_set, (self._accept_idx, 0, 0), Phase.SEED)
            self._predict(earley_set)
        logger.debug("Set 0: %d items", len(earley_set))

    def to_token(self, token: Symbol | str | tuple[Symbol | str, Any]) -> Token:
        """Normalize a token to (terminal symbol, value)."""
        value: Any = None
        if isinstance(token, tuple):
            token, value = token
        name = token.name if isinstance(token, Symbol) else token
        if not self.grammar.has_symbol(name) or not self.grammar.symbol(name).is_terminal:
            raise RecognizerError(f"{name} is not a terminal of the grammar")
        return self.grammar.symbol(name), name if value is None else value

    def advance(self, token: Symbol | str | tuple[Symbol | str, Any]) -> None:
        """Build the next Earley set: scan, reduce, then predict."""
        if not self.sets:
            raise RecognizerError("Chart is not initialized")
        location = len(self.sets)
        if self.input_length is not None and location > self.input_length:
            raise RecognizerError(
                f"Input has only {self.input_length} tokens; cannot advance further"
            )
        symbol, value = self.to_token(token)
        previous = self.sets[-1]
        earley_set = EarleySet(location, self.rules)
        self.sets.append(earley_set)
        self.tokens.append((symbol, value))

        worklist: collections.deque[ItemKey] = collections.deque()
        for rule_idx, pos, origin in previous.with_postdot(symbol):
            key = (rule_idx, pos + 1, origin)
            if self._add(earley_set, key, Phase.SCAN) and self._is_completion(key):
                worklist.append(key)

        while worklist:
            rule_idx, _, origin = worklist.popleft()
            lhs = self.rules[rule_idx].lhs
            for main_idx, main_pos, main_origin in self.sets[origin].with_postdot(lhs):
                key = (main_idx, main_pos + 1, main_origin)
                if self._add(earley_set, key, Phase.REDUCE) and self._is_completion(key):
                    worklist.append(key)

        self._predict(earley_set)
        logger.debug("Set %d: %d items after %s", location, len(earley_set), symbol)

    def _is_completion(self, key: ItemKey) -> bool:
        return key[1] == len(self.rules[key[0]].rhs)

    @property
    def is_accepted(self) -> bool:
        """Whether the input consumed so far is a sentence."""
        if not self.sets:
            return False
        if not self.tokens:
            return self.rewritten.nullable_start
        if self._accept_idx is None:
            return False
        return (self._accept_idx, 1, 0) in self.sets[-1]

    @property
    def exhausted(self) -> bool:
        """Whether the frontier set is empty, so no input can be accepted."""
        return bool(self.sets) and len(self.sets[-1]) == 0

    def trace_lines(self) -> list[str]:
        """One line per item, in the rewritten grammar's terms."""
        lines = []
        for earley_set in self.sets:
            for key in earley_set.keys():
                item = earley_set.item(key)
                lines.append(
                    f"set={earley_set.location} item={item.dr} origin={item.origin}"
                    f" phase={earley_set.phase_of(key)}"
                )
        return lines


def recognize(
    rewritten: RewrittenGrammar,
    tokens: Sequence[Symbol | str | tuple[Symbol | str, Any]],
    closure: Optional[PredictionClosure] = None,
) -> tuple[bool, Chart]:
    """Run the recognizer over a whole input."""
    chart = Chart(rewritten, closure, input_length=len(tokens))
    chart.initialize()
    for token in tokens:
        chart.advance(token)
    return chart.is_accepted, chart


def acceptable_tokens(chart: Chart) -> frozenset[Symbol]:
    """Terminals expected at the frontier."""
    if not chart.sets:
        raise RecognizerError("Chart is not initialized")
    return frozenset(
        sym for sym in chart.sets[-1].postdot_symbols() if sym.is_terminal
    )


def _nulling_present_position(rewritten: RewrittenGrammar, rule: Rule, pos: int) -> int:
    """Dot position in the nulling-present rule, moved past trailing nulled symbols."""
    if pos == 0:
        return 0
    markup = rewritten.markup.get(rule)
    if markup is None:
        return pos
    nulled = markup.positions
    kept = [idx for idx in range(len(markup.nulling_present.rhs)) if idx not in nulled]
    position = kept[pos - 1] + 1
    while position in nulled:
        position += 1
    return position


def _chain_origins(chart: Chart, rule: Rule, origin: int) -> set[int]:
    """Origins of the chain-head items that a continuation item belongs to."""
    binding = chart.rewritten.bindings[rule]
    if binding.chain_head:
        return {origin}
    origins: set[int] = set()
    for main_idx, _, main_origin in chart.sets[origin].with_postdot(rule.lhs):
        origins |= _chain_origins(chart, chart.rules[main_idx], main_origin)
    return origins


def progress_report(chart: Chart, location: int) -> list[tuple[DottedRule, int]]:
    """Items of one set as pre-rewrite dotted rules with their origins."""
    if chart.frontier is None or location > chart.frontier:
        raise RecognizerError(f"Set {location} is not built yet")
    rewritten = chart.rewritten
    report: set[tuple[DottedRule, int]] = set()
    for rule_idx, pos, origin in chart.sets[location].keys():
        rule = chart.rules[rule_idx]
        binding = rewritten.bindings[rule]
        if binding.pre_rewrite_rule is None:
            continue
        position = _nulling_present_position(rewritten, rule, pos)
        dotted = DottedRule(binding.pre_rewrite_rule, binding.pre_position(position))
        for pre_origin in _chain_origins(chart, rule, origin):
            report.add((dotted, pre_origin))
    rule_order = rewritten.original.rule_index
    return sorted(
        report,
        key=lambda entry: (entry[1], rule_order.get(entry[0].rule, -1), entry[0].pos),
    )


def chart_stats(chart: Chart) -> ChartStats:
    """Per-set item counts, totals and add attempts."""
    phase_counts: collections.Counter = collections.Counter()
    for earley_set in chart.sets:
        for key in earley_set.keys():
            phase_counts[earley_set.phase_of(key)] += 1
    items_per_set = tuple(len(earley_set) for earley_set in chart.sets)
    return ChartStats(
        items_per_set=items_per_set,
        total_items=sum(items_per_set),
        attempts=chart.attempts,
        duplicate_attempts=chart.duplicate_attempts,
        phase_counts={phase: phase_counts[phase] for phase in Phase},
    )
