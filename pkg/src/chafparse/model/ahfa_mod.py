"""Split LR(0) ε-DFA (AHFA) construction and statistics.

States are sets of dotted rules. Confirmed states are reached on a symbol,
predicted states on ε. Dotted rules whose postdot symbol is nulling are
advanced past it inside every state, and nulling symbols are never
predicted or used as transition labels. The AHFA is built for measurement
and display; the recognizer does not use it.
"""

import collections
import dataclasses
import enum
import logging
import statistics
from typing import Iterable, Mapping, Optional, Sequence

from chafparse.model.grammar_mod import Symbol, SymbolClass, classify
from chafparse.model.recognizer_mod import DottedRule, next_dr, postdot
from chafparse.model.rewrite_mod import RewriteMode, RewrittenGrammar


logger = logging.getLogger(__name__)


class AhfaError(Exception):
    """Raised when the AHFA cannot be built for a grammar."""


class Epsilon(enum.Enum):
    """Label of transitions to predicted states."""

    EPSILON = "ε"

    def __str__(self) -> str:
        return self.value


EPSILON = Epsilon.EPSILON
Label = Symbol | Epsilon


class StateKind(enum.StrEnum):
    CONFIRMED = "confirmed"
    PREDICTED = "predicted"


@dataclasses.dataclass(frozen=True)
class AhfaState:
    """A numbered set of dotted rules."""

    id: int
    items: frozenset[DottedRule]
    kind: StateKind

    def __len__(self) -> int:
        return len(self.items)

    @property
    def label(self) -> str:
        prefix = "C" if self.kind == StateKind.CONFIRMED else "P"
        return f"{prefix}{self.id}"

    def sorted_items(self) -> list[DottedRule]:
        return sorted(self.items, key=str)

    def completed_lhs(self) -> frozenset[Symbol]:
        return frozenset(dr.rule.lhs for dr in self.items if dr.is_completion)


@dataclasses.dataclass(frozen=True)
class GotoTable:
    """Partial transition function on (state id, symbol or ε)."""

    transitions: Mapping[tuple[int, Label], int]

    def get(self, state: int, label: Label) -> Optional[int]:
        return self.transitions.get((state, label))

    def edges(self) -> list[tuple[int, Label, int]]:
        return [(src, label, dst) for (src, label), dst in self.transitions.items()]


@dataclasses.dataclass(frozen=True)
class KindStats:
    """Size statistics of the states of one kind."""

    count: int
    histogram: Mapping[int, int]
    mean_size: float
    mean_square_size: float


@dataclasses.dataclass(frozen=True)
class AhfaStats:
    """AHFA size statistics and the dotted-rule duplication report."""

    by_kind: Mapping[StateKind, KindStats]
    completed_lhs_counts: Mapping[int, int]
    completed_lhs_histogram: Mapping[int, int]
    duplicated: Mapping[DottedRule, tuple[int, ...]]
    total_items: int
    distinct_items: int


def _nulling_closure(items: Iterable[DottedRule], cls: SymbolClass) -> frozenset[DottedRule]:
    closed = set(items)
    stack = list(closed)
    while stack:
        dotted = stack.pop()
        symbol = postdot(dotted)
        if symbol is not None and cls.is_nulling(symbol):
            advanced = next_dr(dotted)
            if advanced is not None and advanced not in closed:
                closed.add(advanced)
                stack.append(advanced)
    return frozenset(closed)


def _predictions(
    items: Iterable[DottedRule], rewritten: RewrittenGrammar, cls: SymbolClass
) -> frozenset[DottedRule]:
    """Transitive dot-0 predictions for the postdot nonterminals of `items`."""
    grammar = rewritten.grammar
    predicted: set[DottedRule] = set()
    seen_symbols: set[Symbol] = set()
    pending = [postdot(dotted) for dotted in items]
    while pending:
        symbol = pending.pop()
        if (
            symbol is None
            or symbol.is_terminal
            or cls.is_nulling(symbol)
            or symbol in seen_symbols
        ):
            continue
        seen_symbols.add(symbol)
        for rule in grammar.rules_for(symbol):
            for dotted in _nulling_closure([DottedRule(rule, 0)], cls):
                if dotted not in predicted:
                    predicted.add(dotted)
                    pending.append(postdot(dotted))
    return frozenset(predicted)


def build_ahfa(rewritten: RewrittenGrammar) -> tuple[list[AhfaState], GotoTable]:
    """Build the AHFA of an NNF grammar, numbering states breadth-first."""
    if rewritten.mode != RewriteMode.NNF:
        raise AhfaError(f"AHFA construction needs an NNF grammar, got {rewritten.mode}")
    grammar = rewritten.grammar
    accept_rule = grammar.accept_rule
    if accept_rule is None:
        raise AhfaError("Grammar has no accept rule")
    cls = classify(grammar)
    labels = [sym for sym in grammar.symbols if not cls.is_nulling(sym)]

    states: list[AhfaState] = []
    ids: dict[frozenset[DottedRule], int] = {}
    transitions: dict[tuple[int, Label], int] = {}

    def add_state(items: frozenset[DottedRule], kind: StateKind) -> int:
        if items not in ids:
            ids[items] = len(states)
            states.append(AhfaState(len(states), items, kind))
        return ids[items]

    add_state(_nulling_closure([DottedRule(accept_rule, 0)], cls), StateKind.CONFIRMED)
    queue = collections.deque([0])
    while queue:
        state = states[queue.popleft()]
        successors: list[tuple[Label, frozenset[DottedRule], StateKind]] = []
        # Predicted states are closed under prediction already.
        if state.kind == StateKind.CONFIRMED:
            predicted = _predictions(state.items, rewritten, cls)
            if predicted:
                successors.append((EPSILON, predicted, StateKind.PREDICTED))
        for symbol in labels:
            kernel = [
                advanced
                for dotted in state.sorted_items()
                if postdot(dotted) == symbol and (advanced := next_dr(dotted)) is not None
            ]
            if kernel:
                successors.append(
                    (symbol, _nulling_closure(kernel, cls), StateKind.CONFIRMED)
                )
        for label, items, kind in successors:
            known = items in ids
            target = add_state(items, kind)
            transitions[(state.id, label)] = target
            if not known:
                queue.append(target)
    logger.debug("AHFA: %d states, %d transitions", len(states), len(transitions))
    return states, GotoTable(transitions)


def goto(table: GotoTable, state: int, label: Label) -> Optional[int]:
    """Transition target, or None when undefined."""
    return table.get(state, label)


def _kind_stats(sizes: Sequence[int]) -> KindStats:
    if not sizes:
        return KindStats(0, {}, 0.0, 0.0)
    return KindStats(
        count=len(sizes),
        histogram=dict(sorted(collections.Counter(sizes).items())),
        mean_size=statistics.fmean(sizes),
        mean_square_size=statistics.fmean(size * size for size in sizes),
    )


def ahfa_statistics(states: Sequence[AhfaState]) -> AhfaStats:
    """Size histograms, completed-LHS counts and duplicated dotted rules."""
    by_kind = {
        kind: _kind_stats([len(state) for state in states if state.kind == kind])
        for kind in StateKind
    }
    completed = {state.id: len(state.completed_lhs()) for state in states}
    occurrences: dict[DottedRule, list[int]] = collections.defaultdict(list)
    for state in states:
        for dotted in state.sorted_items():
            occurrences[dotted].append(state.id)
    duplicated = {
        dotted: tuple(state_ids)
        for dotted, state_ids in sorted(occurrences.items(), key=lambda kv: str(kv[0]))
        if len(state_ids) > 1
    }
    return AhfaStats(
        by_kind=by_kind,
        completed_lhs_counts=completed,
        completed_lhs_histogram=dict(sorted(collections.Counter(completed.values()).items())),
        duplicated=duplicated,
        total_items=sum(len(state) for state in states),
        distinct_items=len(occurrences),
    )
