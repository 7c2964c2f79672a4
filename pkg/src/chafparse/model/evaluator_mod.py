"""Parse trees and semantic evaluation in pre-rewrite terms.

Trees are extracted from an accepted chart over the nulling-free grammar.
Evaluation puts back what the rewrites took apart:

* pass-through rules return their only child's value,
* verbatim rules call the pre-rewrite rule function directly,
* CHAF tail, inner and head rules fill a child-value array (ChildV) slot by
  slot, and the head calls the pre-rewrite rule function once it is full,
* symbols removed by nulling elimination come back as nulled values of the
  symbol they stand for.

Children are evaluated leftmost first, bottom-up.
"""

import dataclasses
import enum
import logging
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence

from chafparse import config
from chafparse.model.grammar_mod import Rule, Symbol
from chafparse.model.recognizer_mod import Chart
from chafparse.model.rewrite_mod import RewriteBinding, RewrittenGrammar, Role


logger = logging.getLogger(__name__)


class EvaluationError(Exception):
    """Raised for missing semantics and child-value protocol violations."""


class NodeKind(enum.StrEnum):
    RULE = "rule"
    TERMINAL = "token"
    NULLED = "nulled"


class Nulled(enum.Enum):
    """Inert value of a nulled symbol with no nulled-value function."""

    NULLED = "nulled"

    def __repr__(self) -> str:
        return "NULLED"


NULLED = Nulled.NULLED


@dataclasses.dataclass(frozen=True)
class ParseNode:
    """Node of a parse tree over the nulling-free grammar."""

    kind: NodeKind
    span: tuple[int, int]
    rule: Optional[Rule] = None
    children: tuple["ParseNode", ...] = ()
    symbol: Optional[Symbol] = None
    value: Any = None

    def __post_init__(self) -> None:
        if self.kind == NodeKind.RULE and (
            self.rule is None or len(self.children) != len(self.rule.rhs)
        ):
            raise EvaluationError(f"Rule node children do not match {self.rule}")
        if self.kind == NodeKind.NULLED and self.span[0] != self.span[1]:
            raise EvaluationError("Nulled nodes span no input")


@dataclasses.dataclass(frozen=True)
class ParseContext:
    """What a semantic function can see of the parse."""

    chart: Optional[Chart]
    span: tuple[int, int]
    rule: Optional[Rule] = None
    symbol: Optional[Symbol] = None

    @property
    def tokens(self) -> tuple[tuple[Symbol, Any], ...]:
        return () if self.chart is None else tuple(self.chart.tokens)


RuleFunction = Callable[..., Any]
TokenFunction = Callable[[ParseContext, Any], Any]
NulledFunction = Callable[[ParseContext], Any]


@dataclasses.dataclass
class Semantics:
    """Rule, token and nulled-value functions keyed by pre-rewrite rule or symbol name.

    A rule function is called as fn(context, *child_values).
    """

    rules: Mapping[Rule, RuleFunction] = dataclasses.field(default_factory=dict)
    tokens: Mapping[str, TokenFunction] = dataclasses.field(default_factory=dict)
    nulled: Mapping[str, NulledFunction] = dataclasses.field(default_factory=dict)
    default_rule: Optional[RuleFunction] = None
    default_token: Optional[TokenFunction] = None
    default_nulled: Optional[NulledFunction] = None

    def rule_value(self, rule: Rule, context: ParseContext, children: Sequence[Any]) -> Any:
        function = self.rules.get(rule, self.default_rule)
        if function is None:
            raise EvaluationError(f"No semantics for rule {rule}")
        return function(context, *children)

    def token_value(self, symbol: Symbol, context: ParseContext, value: Any) -> Any:
        function = self.tokens.get(symbol.name, self.default_token)
        return value if function is None else function(context, value)

    def nulled_value(self, symbol: Symbol, context: ParseContext) -> Any:
        function = self.nulled.get(symbol.name, self.default_nulled)
        return NULLED if function is None else function(context)


def collecting_semantics() -> Semantics:
    """Semantics whose values are tagged tuples recording the whole tree."""
    return Semantics(
        default_rule=lambda context, *children: (str(context.rule), *children),
        default_token=lambda context, value: ("token", context.symbol.name, value),
        default_nulled=lambda context: ("nulled", context.symbol.name),
    )


@dataclasses.dataclass(frozen=True)
class ChildV:
    """Child values of one pre-rewrite rule, collected across a CHAF chain."""

    values: tuple[Any, ...]
    populated: tuple[bool, ...]

    @classmethod
    def empty(cls, length: int) -> "ChildV":
        return cls((None,) * length, (False,) * length)

    def __len__(self) -> int:
        return len(self.values)

    def with_slot(self, slot: int, value: Any) -> "ChildV":
        if self.populated[slot]:
            raise EvaluationError(f"childV slot {slot} populated twice")
        values = list(self.values)
        populated = list(self.populated)
        values[slot] = value
        populated[slot] = True
        return ChildV(tuple(values), tuple(populated))

    @property
    def is_full(self) -> bool:
        return all(self.populated)


def _fill(childv: ChildV, binding: RewriteBinding, values: Sequence[Any]) -> ChildV:
    """Write values right to left into the slots of their positions."""
    for position in sorted(binding.slot_map, reverse=True):
        childv = childv.with_slot(binding.slot_map[position], values[position])
    return childv


def chaf_tail_step(binding: RewriteBinding, values: Sequence[Any]) -> ChildV:
    """Create the child-value array and fill the tail chunk's slots."""
    if binding.role != Role.CHAF_TAIL:
        raise EvaluationError(f"{binding} is not a CHAF tail")
    return _fill(ChildV.empty(binding.childv_len), binding, values)


def chaf_inner_step(binding: RewriteBinding, values: Sequence[Any]) -> ChildV:
    """Fill an inner chunk's slots of the array passed up by its continuation."""
    if binding.role != Role.CHAF_INNER:
        raise EvaluationError(f"{binding} is not a CHAF inner rule")
    childv = values[-1]
    if not isinstance(childv, ChildV):
        raise EvaluationError(f"{binding} expected a childV from its continuation")
    return _fill(childv, binding, values)


def chaf_head_step(
    binding: RewriteBinding,
    values: Sequence[Any],
    semantics: Semantics,
    context: ParseContext,
) -> Any:
    """Fill the head chunk's slots and call the pre-rewrite rule function."""
    if binding.role == Role.CHAF_HEAD:
        childv = values[-1]
        if not isinstance(childv, ChildV):
            raise EvaluationError(f"{binding} expected a childV from its continuation")
    else:
        childv = ChildV.empty(binding.childv_len)
    childv = _fill(childv, binding, values)
    if not childv.is_full:
        missing = [slot for slot, done in enumerate(childv.populated) if not done]
        raise EvaluationError(f"childV slots {missing} unpopulated at {binding}")
    assert binding.pre_rewrite_rule is not None
    return semantics.rule_value(binding.pre_rewrite_rule, context, childv.values)


class _TreeSearch:
    """Top-down enumeration of the trees in an accepted chart."""

    def __init__(self, chart: Chart) -> None:
        self.chart = chart
        self.rules = chart.rules
        self.completed: list[dict[tuple[Symbol, int], list[int]]] = []
        for earley_set in chart.sets:
            by_lhs: dict[tuple[Symbol, int], list[int]] = {}
            for rule_idx, pos, origin in earley_set.keys():
                rule = self.rules[rule_idx]
                if pos == len(rule.rhs):
                    by_lhs.setdefault((rule.lhs, origin), []).append(rule_idx)
            self.completed.append({key: sorted(idxs) for key, idxs in by_lhs.items()})
        self._splits: dict[tuple[int, int, int, int], tuple[tuple[int, ...], ...]] = {}

    def derives(self, symbol: Symbol, start: int, end: int) -> bool:
        if symbol.is_terminal:
            return end == start + 1 and self.chart.tokens[start][0] == symbol
        return (symbol, start) in self.completed[end]

    def splits(
        self, rule_idx: int, count: int, start: int, end: int
    ) -> tuple[tuple[int, ...], ...]:
        """Boundaries for the first `count` children of a rule over [start, end)."""
        key = (rule_idx, count, start, end)
        if key not in self._splits:
            self._splits[key] = self._find_splits(rule_idx, count, start, end)
        return self._splits[key]

    def _find_splits(
        self, rule_idx: int, count: int, start: int, end: int
    ) -> tuple[tuple[int, ...], ...]:
        if count == 0:
            return ((start,),) if start == end else ()
        symbol = self.rules[rule_idx].rhs[count - 1]
        found = []
        for middle in range(start + count - 1, end):
            if (rule_idx, count - 1, start) in self.chart.sets[middle] and self.derives(
                symbol, middle, end
            ):
                for prefix in self.splits(rule_idx, count - 1, start, middle):
                    found.append(prefix + (end,))
        return tuple(found)

    def symbol_trees(
        self, symbol: Symbol, start: int, end: int, path: frozenset
    ) -> Iterator[ParseNode]:
        if symbol.is_terminal:
            if self.derives(symbol, start, end):
                yield ParseNode(
                    NodeKind.TERMINAL,
                    (start, end),
                    symbol=symbol,
                    value=self.chart.tokens[start][1],
                )
            return
        if (symbol, start, end) in path:
            return
        path = path | {(symbol, start, end)}
        for rule_idx in self.completed[end].get((symbol, start), ()):
            yield from self.rule_trees(rule_idx, start, end, path)

    def rule_trees(
        self, rule_idx: int, start: int, end: int, path: frozenset
    ) -> Iterator[ParseNode]:
        rule = self.rules[rule_idx]
        bounds_list = sorted(
            self.splits(rule_idx, len(rule.rhs), start, end),
            key=lambda bounds: tuple(-bound for bound in bounds[1:-1]),
        )
        for bounds in bounds_list:
            options = [
                _LazyTrees(self.symbol_trees(child, left, right, path))
                for child, left, right in zip(rule.rhs, bounds, bounds[1:])
            ]
            if any(option.is_empty() for option in options):
                continue
            for children in _combinations(options, ()):
                yield ParseNode(NodeKind.RULE, (start, end), rule, children)


class _LazyTrees:
    """Re-iterable view of a tree generator that builds trees on demand."""

    def __init__(self, trees: Iterator[ParseNode]) -> None:
        self._source = trees
        self._built: list[ParseNode] = []

    def __iter__(self) -> Iterator[ParseNode]:
        idx = 0
        while True:
            if idx == len(self._built):
                tree = next(self._source, None)
                if tree is None:
                    return
                self._built.append(tree)
            yield self._built[idx]
            idx += 1

    def is_empty(self) -> bool:
        return next(iter(self), None) is None


def _combinations(
    options: Sequence[_LazyTrees], chosen: tuple[ParseNode, ...]
) -> Iterator[tuple[ParseNode, ...]]:
    """Lazy cartesian product, last child varying fastest."""
    if len(chosen) == len(options):
        yield chosen
        return
    for tree in options[len(chosen)]:
        yield from _combinations(options, chosen + (tree,))


def iter_trees(chart: Chart, limit: Optional[int] = None) -> Iterator[ParseNode]:
    """All acyclic trees of an accepted chart, canonical tree first.

    Alternatives are ordered by rule index, then by longest leftmost child.
    A tree in which a (symbol, span) node has an identical node as a proper
    descendant is skipped.
    """
    if not chart.is_accepted:
        return
    limit = config.settings.max_parse_trees if limit is None else limit
    if not chart.tokens:
        yield ParseNode(
            NodeKind.NULLED, (0, 0), symbol=chart.rewritten.grammar.start
        )
        return
    accept_rule = chart.grammar.accept_rule
    assert accept_rule is not None
    search = _TreeSearch(chart)
    accept_idx = chart.grammar.rule_index[accept_rule]
    trees = search.rule_trees(accept_idx, 0, len(chart.tokens), frozenset())
    for count, tree in enumerate(trees, start=1):
        if count > limit:
            raise EvaluationError(f"More than {limit} parse trees")
        yield tree


def build_tree(chart: Chart) -> Optional[ParseNode]:
    """The canonical parse tree, or None if the chart is not accepted."""
    return next(iter_trees(chart), None)


class _Evaluator:
    def __init__(
        self,
        rewritten: RewrittenGrammar,
        semantics: Semantics,
        chart: Optional[Chart],
    ) -> None:
        self.rewritten = rewritten
        self.semantics = semantics
        self.chart = chart

    def nulled(self, symbol: Symbol, location: int) -> Any:
        original = self.rewritten.original_symbol(symbol)
        context = ParseContext(self.chart, (location, location), symbol=original)
        return self.semantics.nulled_value(original, context)

    def value(self, node: ParseNode) -> Any:
        if node.kind == NodeKind.TERMINAL:
            assert node.symbol is not None
            context = ParseContext(self.chart, node.span, symbol=node.symbol)
            return self.semantics.token_value(node.symbol, context, node.value)
        if node.kind == NodeKind.NULLED:
            assert node.symbol is not None
            return self.nulled(node.symbol, node.span[0])
        assert node.rule is not None
        binding = self.rewritten.bindings[node.rule]
        values = self.child_values(node)
        pre_rule = binding.pre_rewrite_rule
        context = ParseContext(
            self.chart,
            node.span,
            rule=pre_rule,
            symbol=None if pre_rule is None else pre_rule.lhs,
        )
        match binding.role:
            case Role.PASS_THROUGH:
                return values[0]
            case Role.NULLING_ALIAS:
                return self.nulled(node.rule.lhs, node.span[0])
            case Role.CHAF_TAIL if not binding.chain_head:
                return chaf_tail_step(binding, values)
            case Role.CHAF_INNER:
                return chaf_inner_step(binding, values)
            case Role.CHAF_HEAD | Role.CHAF_TAIL:
                return chaf_head_step(binding, values, self.semantics, context)
            case _:
                assert pre_rule is not None
                childv = _fill(ChildV.empty(binding.childv_len), binding, values)
                return self.semantics.rule_value(pre_rule, context, childv.values)

    def child_values(self, node: ParseNode) -> list[Any]:
        """Child values in nulling-present order, nulled symbols restored."""
        assert node.rule is not None
        markup = self.rewritten.markup.get(node.rule)
        nulled = {} if markup is None else dict(markup.insertions)
        width = len(node.children) + len(nulled)
        children = iter(node.children)
        location = node.span[0]
        values = []
        for position in range(width):
            if position in nulled:
                values.append(self.nulled(nulled[position], location))
            else:
                child = next(children)
                values.append(self.value(child))
                location = child.span[1]
        return values


def evaluate(
    tree: ParseNode,
    semantics: Semantics,
    rewritten: RewrittenGrammar,
    chart: Optional[Chart] = None,
) -> Any:
    """Evaluate a tree bottom-up with pre-rewrite semantics."""
    return _Evaluator(rewritten, semantics, chart).value(tree)


def evaluate_all(
    chart: Chart, semantics: Semantics, limit: Optional[int] = None
) -> list[Any]:
    """Root values of every tree in the chart."""
    evaluator = _Evaluator(chart.rewritten, semantics, chart)
    return [evaluator.value(tree) for tree in iter_trees(chart, limit)]
