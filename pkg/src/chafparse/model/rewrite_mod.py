"""Semantics-preserving grammar rewrites.

## NNF
Every rule is factored over all null/non-null choices of its proper
nullables. A proper nullable X gets one nulling alias Xe with the rule
Xe ::= ε.

## CHAF
Rules with proper nullables are split into chunks with at most two proper
nullables each, joined by continuation symbols (S1, S2, ...). Only the
chunks are factored, so rule growth is linear. Each emitted rule records
which slots of the pre-rewrite rule's child-value array it fills.

## Nulling elimination
Nulling symbols are removed from every right-hand side. The removed
symbols and their positions are kept as nulling markup on the rule itself.
"""

import collections
import dataclasses
import enum
import itertools
import logging
from typing import Callable, Iterator, Mapping, Optional

from chafparse import config
from chafparse.model.grammar_mod import (
    Grammar,
    GrammarError,
    Rule,
    Symbol,
    SymbolClass,
    augment,
    classify,
    fresh_name,
)


logger = logging.getLogger(__name__)


class RewriteError(Exception):
    """Raised when a rewrite precondition or protocol check fails."""


class RewriteMode(enum.StrEnum):
    """Which rewrite produced a grammar."""

    NNF = "nnf"
    CHAF = "chaf"
    NULL_FREE = "null-free"


class Role(enum.StrEnum):
    """Semantic role of a rewritten rule."""

    PASS_THROUGH = "pass-through"
    VERBATIM = "verbatim"
    CHAF_HEAD = "chaf-head"
    CHAF_INNER = "chaf-inner"
    CHAF_TAIL = "chaf-tail"
    NULLING_ALIAS = "nulling-alias"


CHAF_ROLES = (Role.CHAF_HEAD, Role.CHAF_INNER, Role.CHAF_TAIL)


@dataclasses.dataclass(frozen=True)
class RewriteBinding:
    """Links a rewritten rule to the pre-rewrite rule it stands for.

    slot_map keys are right-hand side positions of the nulling-present
    rewritten rule, values are child-value array slots, which are positions
    in the pre-rewrite right-hand side. A continuation symbol's position has
    no slot. chain_head marks the rule that completes the child-value array
    and calls the pre-rewrite rule's semantics.
    """

    rewritten_rule: Rule
    pre_rewrite_rule: Optional[Rule]
    role: Role
    slot_map: Mapping[int, int]
    childv_len: int
    chain_head: bool = True

    def __post_init__(self) -> None:
        slots = list(self.slot_map.values())
        if len(set(slots)) != len(slots) or any(
            not 0 <= slot < self.childv_len for slot in slots
        ):
            raise RewriteError(f"Bad slot map {self.slot_map} for {self}")
        if self.role in CHAF_ROLES:
            if self.pre_rewrite_rule is None or self.childv_len != len(
                self.pre_rewrite_rule.rhs
            ):
                raise RewriteError(f"CHAF binding without pre-rewrite rule: {self}")
        if self.role == Role.PASS_THROUGH:
            if len(self.rewritten_rule.rhs) + len(self.rewritten_rule.nulled) != 1:
                raise RewriteError(f"Pass-through rule must have one child: {self}")

    def __str__(self) -> str:
        return f"{self.rewritten_rule} [{self.role}]"

    @property
    def start_slot(self) -> int:
        """First pre-rewrite position covered by this rule."""
        return min(self.slot_map.values(), default=0)

    def pre_position(self, position: int) -> int:
        """Translate a nulling-present dot position to a pre-rewrite one."""
        if position == 0:
            return self.start_slot
        previous = self.slot_map.get(position - 1)
        return self.childv_len if previous is None else previous + 1


@dataclasses.dataclass(frozen=True)
class NullingMarkup:
    """Nulling symbols removed from a rule, with their positions."""

    insertions: tuple[tuple[int, Symbol], ...]
    nulling_present: Rule

    @property
    def positions(self) -> frozenset[int]:
        return frozenset(pos for pos, _ in self.insertions)


@dataclasses.dataclass(frozen=True)
class RewrittenGrammar:
    """A rewritten grammar with the bindings back to its pre-rewrite form."""

    grammar: Grammar
    bindings: Mapping[Rule, RewriteBinding]
    mode: RewriteMode
    original: Grammar
    nullable_start: bool
    alias_of: Mapping[Symbol, Symbol] = dataclasses.field(default_factory=dict)
    markup: Mapping[Rule, NullingMarkup] = dataclasses.field(default_factory=dict)
    nulling_present: Optional[Grammar] = None

    def __post_init__(self) -> None:
        if set(self.bindings) != set(self.grammar.rules):
            raise RewriteError("Every rewritten rule needs exactly one binding")

    def binding(self, rule: Rule) -> RewriteBinding:
        return self.bindings[rule]

    def nulling_present_rule(self, rule: Rule) -> Rule:
        """The rule before nulling elimination."""
        markup = self.markup.get(rule)
        return rule if markup is None else markup.nulling_present

    def original_symbol(self, symbol: Symbol) -> Symbol:
        """Map a nulling alias back to the proper nullable it stands for."""
        return self.alias_of.get(symbol, symbol)

    def role_counts(self) -> collections.Counter:
        return collections.Counter(
            self.bindings[rule].role for rule in self.grammar.rules
        )

    def rules_from(self, pre_rewrite_rule: Rule) -> tuple[Rule, ...]:
        """Rewritten rules bound to a pre-rewrite rule."""
        return tuple(
            rule
            for rule in self.grammar.rules
            if self.bindings[rule].pre_rewrite_rule == pre_rewrite_rule
        )


def rule_identity(
    rule: Rule, markup: Optional[NullingMarkup] = None
) -> tuple[str, tuple[str, ...], tuple[tuple[int, str], ...]]:
    """Key that distinguishes rules by LHS, RHS and nulling markup."""
    insertions = rule.nulled if markup is None else markup.insertions
    return (
        rule.lhs.name,
        tuple(sym.name for sym in rule.rhs),
        tuple((pos, sym.name) for pos, sym in insertions),
    )


def apply_markup(rule: Rule, markup: NullingMarkup) -> Rule:
    """Re-insert eliminated nulling symbols, giving the nulling-present rule."""
    rhs = list(rule.rhs)
    for pos, sym in sorted(markup.insertions, key=lambda insertion: insertion[0]):
        rhs.insert(pos, sym)
    return Rule(rule.lhs, tuple(rhs))


class _Builder:
    """Collects rules, bindings and new symbols for one rewrite."""

    def __init__(self, grammar: Grammar, cls: SymbolClass) -> None:
        if not grammar.is_augmented:
            raise GrammarError(
                "Rewrites need an augmented grammar",
                GrammarError.ErrorType.NOT_AUGMENTED,
            )
        self.grammar = grammar
        self.cls = cls
        self.taken = {sym.name for sym in grammar.symbols}
        self.rules: list[Rule] = []
        self.bindings: dict[Rule, RewriteBinding] = {}
        self.aliases: dict[Symbol, Symbol] = {}
        factored_rhs = {
            sym
            for rule in grammar.rules
            if rule != grammar.accept_rule
            for sym in rule.rhs
        }
        for sym in grammar.nonterminals:
            if cls.is_proper_nullable(sym) and sym in factored_rhs:
                alias = Symbol(
                    fresh_name(sym.name, self.taken, config.settings.alias_suffix)
                )
                self.taken.add(alias.name)
                self.aliases[sym] = alias
        self.continuations: list[Symbol] = []
        self._continuation_counts: collections.Counter = collections.Counter()
        self._emitted_aliases: set[Symbol] = set()

    def is_nulling(self, sym: Symbol) -> bool:
        return sym in self.aliases.values() or self.cls.is_nulling(sym)

    def emit(
        self,
        rule: Rule,
        pre_rewrite_rule: Optional[Rule],
        role: Role,
        slot_map: Mapping[int, int],
        chain_head: bool = True,
    ) -> None:
        childv_len = 0 if pre_rewrite_rule is None else len(pre_rewrite_rule.rhs)
        self.rules.append(rule)
        self.bindings[rule] = RewriteBinding(
            rule, pre_rewrite_rule, role, dict(slot_map), childv_len, chain_head
        )

    def emit_verbatim(self, rule: Rule) -> None:
        self.emit(rule, rule, Role.VERBATIM, {pos: pos for pos in range(len(rule.rhs))})

    def emit_alias(self, nullable: Symbol) -> None:
        """Emit Xe ::= ε, bound to X ::= ε when the grammar has that rule."""
        if nullable in self._emitted_aliases:
            return
        self._emitted_aliases.add(nullable)
        empty_rule = Rule(nullable, ())
        alias_rule = Rule(self.aliases[nullable], ())
        if empty_rule in self.grammar.rule_index:
            self.emit(alias_rule, empty_rule, Role.VERBATIM, {})
        else:
            self.emit(alias_rule, None, Role.NULLING_ALIAS, {})

    def new_continuation(self, lhs: Symbol) -> Symbol:
        while True:
            self._continuation_counts[lhs.name] += 1
            name = f"{lhs.name}{self._continuation_counts[lhs.name]}"
            if name not in self.taken:
                break
        self.taken.add(name)
        symbol = Symbol(name)
        self.continuations.append(symbol)
        return symbol

    def variants(self, rhs: tuple[Symbol, ...]) -> Iterator[tuple[Symbol, ...]]:
        """Every null/non-null choice over the proper nullables of `rhs`."""
        positions = [
            pos for pos, sym in enumerate(rhs) if self.cls.is_proper_nullable(sym)
        ]
        for choice in itertools.product((False, True), repeat=len(positions)):
            body = list(rhs)
            for pos, nulled in zip(positions, choice):
                if nulled:
                    body[pos] = self.aliases[body[pos]]
            yield tuple(body)

    def handle_special(self, rule: Rule) -> bool:
        """Emit accept and empty rules. Return True if the rule was handled."""
        if rule == self.grammar.accept_rule:
            self.emit(rule, rule, Role.PASS_THROUGH, {0: 0})
            return True
        if self.cls.is_proper_nullable(rule.lhs) and not rule.rhs:
            # A symbol that no factored rule uses keeps no alias.
            if rule.lhs in self.aliases:
                self.emit_alias(rule.lhs)
            return True
        return False

    def finish(self, mode: RewriteMode) -> RewrittenGrammar:
        for nullable in self.aliases:
            self.emit_alias(nullable)
        symbols: list[Symbol] = []
        for sym in self.grammar.symbols:
            symbols.append(sym)
            if sym in self.aliases:
                symbols.append(self.aliases[sym])
        symbols.extend(self.continuations)
        grammar = Grammar(
            tuple(symbols), tuple(self.rules), self.grammar.start, self.grammar.accept
        )
        logger.debug(
            "%s rewrite: %d rules in, %d rules out",
            mode,
            len(self.grammar.rules),
            len(grammar.rules),
        )
        return RewrittenGrammar(
            grammar=grammar,
            bindings=self.bindings,
            mode=mode,
            original=self.grammar,
            nullable_start=self.cls.is_nullable(self.grammar.start),
            alias_of={alias: sym for sym, alias in self.aliases.items()},
        )


def nnf_factoring_count(rule: Rule, cls: SymbolClass) -> int:
    """Number of NNF factorings of a rule, without building them."""
    return 2 ** sum(1 for sym in rule.rhs if cls.is_proper_nullable(sym))


def iter_nnf_factorings(
    rule: Rule, cls: SymbolClass, aliases: Mapping[Symbol, Symbol]
) -> Iterator[Rule]:
    """Stream the NNF factorings of a rule."""
    positions = [pos for pos, sym in enumerate(rule.rhs) if cls.is_proper_nullable(sym)]
    for choice in itertools.product((False, True), repeat=len(positions)):
        body = list(rule.rhs)
        for pos, nulled in zip(positions, choice):
            if nulled:
                body[pos] = aliases[body[pos]]
        yield Rule(rule.lhs, tuple(body))


def nnf_rewrite(grammar: Grammar, cls: Optional[SymbolClass] = None) -> RewrittenGrammar:
    """Rewrite to Nihilist Normal Form.

    All factorings are kept, including the one where every proper nullable
    is replaced by its alias. The accept rule is passed through unchanged.
    """
    cls = classify(grammar) if cls is None else cls
    builder = _Builder(grammar, cls)
    for rule in grammar.rules:
        if builder.handle_special(rule):
            continue
        for factored in iter_nnf_factorings(rule, cls, builder.aliases):
            builder.emit(
                factored,
                rule,
                Role.VERBATIM,
                {pos: pos for pos in range(len(factored.rhs))},
            )
    return builder.finish(RewriteMode.NNF)


def _chunks(rhs: tuple[Symbol, ...], cls: SymbolClass) -> list[tuple[int, int]]:
    """Split points: cut after the first proper nullable while more than two remain."""
    proper = [pos for pos, sym in enumerate(rhs) if cls.is_proper_nullable(sym)]
    chunks = []
    start = 0
    while sum(1 for pos in proper if pos >= start) > 2:
        first = next(pos for pos in proper if pos >= start)
        chunks.append((start, first + 1))
        start = first + 1
    chunks.append((start, len(rhs)))
    return chunks


def _chaf_factor(builder: _Builder, rule: Rule) -> None:
    """Emit the CHAF rules for one rule that has proper nullables."""
    rhs = rule.rhs
    chunks = _chunks(rhs, builder.cls)
    lhs_of = [rule.lhs] + [builder.new_continuation(rule.lhs) for _ in chunks[1:]]
    for chunk_number, (begin, end) in enumerate(chunks):
        lhs = lhs_of[chunk_number]
        is_head = chunk_number == 0
        if chunk_number == len(chunks) - 1:
            for body in builder.variants(rhs[begin:]):
                if all(builder.is_nulling(sym) for sym in body):
                    continue
                builder.emit(
                    Rule(lhs, body),
                    rule,
                    Role.CHAF_TAIL,
                    {pos: begin + pos for pos in range(len(body))},
                    chain_head=is_head,
                )
            continue
        continuation = lhs_of[chunk_number + 1]
        for body in builder.variants(rhs[begin:end]):
            builder.emit(
                Rule(lhs, body + (continuation,)),
                rule,
                Role.CHAF_HEAD if is_head else Role.CHAF_INNER,
                {pos: begin + pos for pos in range(len(body))},
                chain_head=is_head,
            )
        remainder = rhs[end:]
        if not all(builder.cls.is_nullable(sym) for sym in remainder):
            continue
        nulled_remainder = tuple(builder.aliases.get(sym, sym) for sym in remainder)
        for body in builder.variants(rhs[begin:end]):
            full_body = body + nulled_remainder
            if all(builder.is_nulling(sym) for sym in full_body):
                continue
            builder.emit(
                Rule(lhs, full_body),
                rule,
                Role.VERBATIM if is_head else Role.CHAF_TAIL,
                {pos: begin + pos for pos in range(len(full_body))},
                chain_head=is_head,
            )


def chaf_rewrite(grammar: Grammar, cls: Optional[SymbolClass] = None) -> RewrittenGrammar:
    """Rewrite to CHAF.

    Alternatives whose right-hand side is entirely nulling are dropped; the
    empty string is covered by the nullable_start flag instead.
    """
    cls = classify(grammar) if cls is None else cls
    builder = _Builder(grammar, cls)
    for rule in grammar.rules:
        if builder.handle_special(rule):
            continue
        if cls.is_proper_nullable(rule.lhs) and all(
            cls.is_nulling(sym) for sym in rule.rhs
        ):
            logger.debug("Dropping all-nulling rule %s", rule)
            continue
        if any(cls.is_proper_nullable(sym) for sym in rule.rhs):
            _chaf_factor(builder, rule)
        else:
            builder.emit_verbatim(rule)
    rewritten = builder.finish(RewriteMode.CHAF)
    check_slot_coverage(rewritten)
    return rewritten


def check_slot_coverage(rewritten: RewrittenGrammar) -> int:
    """Check that every head/inner/tail chain fills each slot exactly once.

    Returns the number of chains checked. Continuation symbols are resolved
    once each, so the check stays linear in the number of rules.
    """
    grammar = rewritten.grammar
    continuation_cover: dict[Symbol, frozenset[int]] = {}

    def cover(rule: Rule) -> frozenset[int]:
        binding = rewritten.bindings[rule]
        own = list(binding.slot_map.values())
        if len(set(own)) != len(own):
            raise RewriteError(f"Slot filled twice in {rule}")
        if binding.role not in (Role.CHAF_HEAD, Role.CHAF_INNER):
            return frozenset(own)
        continuation = rewritten.nulling_present_rule(rule).rhs[-1]
        rest = continuation_cover_of(continuation)
        if rest & set(own):
            raise RewriteError(f"Slots of {rule} overlap its continuation")
        return frozenset(own) | rest

    def continuation_cover_of(continuation: Symbol) -> frozenset[int]:
        if continuation not in continuation_cover:
            covers = {cover(rule) for rule in grammar.rules_for(continuation)}
            if len(covers) != 1:
                raise RewriteError(
                    f"Alternatives of {continuation} fill different slots: {covers}"
                )
            continuation_cover[continuation] = covers.pop()
        return continuation_cover[continuation]

    chains = 0
    for rule in grammar.rules:
        binding = rewritten.bindings[rule]
        if not binding.chain_head or binding.role == Role.NULLING_ALIAS:
            continue
        chains += 1
        if cover(rule) != frozenset(range(binding.childv_len)):
            raise RewriteError(
                f"Slots of {rule} do not cover 0..{binding.childv_len - 1}"
            )
    return chains


def eliminate_nulling(
    rewritten: RewrittenGrammar, cls: Optional[SymbolClass] = None
) -> RewrittenGrammar:
    """Remove nulling symbols, recording nulling markup.

    Rules whose right-hand side becomes empty and rules for nulling symbols
    are dropped. The result has no nullable symbols.
    """
    if rewritten.mode not in (RewriteMode.NNF, RewriteMode.CHAF):
        raise RewriteError(
            f"Nulling elimination needs an NNF or CHAF grammar, got {rewritten.mode}"
        )
    grammar = rewritten.grammar
    cls = classify(grammar) if cls is None else cls
    rules: list[Rule] = []
    bindings: dict[Rule, RewriteBinding] = {}
    markup: dict[Rule, NullingMarkup] = {}
    for rule in grammar.rules:
        if cls.is_nulling(rule.lhs):
            continue
        insertions = tuple(
            (pos, sym) for pos, sym in enumerate(rule.rhs) if cls.is_nulling(sym)
        )
        kept = tuple(sym for sym in rule.rhs if not cls.is_nulling(sym))
        if not kept:
            logger.debug("Dropping emptied rule %s", rule)
            continue
        null_free = Rule(rule.lhs, kept, insertions)
        rules.append(null_free)
        bindings[null_free] = dataclasses.replace(
            rewritten.bindings[rule], rewritten_rule=null_free
        )
        markup[null_free] = NullingMarkup(insertions, rule)
    symbols = tuple(
        sym
        for sym in grammar.symbols
        if not cls.is_nulling(sym) or sym in (grammar.start, grammar.accept)
    )
    null_free_grammar = Grammar(symbols, tuple(rules), grammar.start, grammar.accept)
    leftover = classify(null_free_grammar).nullable_symbols()
    if leftover:
        raise RewriteError(
            "Nullable symbols remain after elimination: "
            + ", ".join(sym.name for sym in leftover)
        )
    logger.debug(
        "Nulling elimination: %d rules in, %d rules out", len(grammar.rules), len(rules)
    )
    return RewrittenGrammar(
        grammar=null_free_grammar,
        bindings=bindings,
        mode=RewriteMode.NULL_FREE,
        original=rewritten.original,
        nullable_start=rewritten.nullable_start,
        alias_of=rewritten.alias_of,
        markup=markup,
        nulling_present=grammar,
    )


REWRITERS: Mapping[RewriteMode, Callable[[Grammar, SymbolClass], RewrittenGrammar]] = {
    RewriteMode.NNF: nnf_rewrite,
    RewriteMode.CHAF: chaf_rewrite,
}


def prepare_grammar(
    grammar: Grammar, mode: RewriteMode = RewriteMode.CHAF
) -> RewrittenGrammar:
    """Augment if needed, rewrite, and eliminate nulling symbols."""
    if not grammar.is_augmented:
        grammar = augment(grammar)
    if mode == RewriteMode.NULL_FREE:
        mode = RewriteMode.CHAF
    rewritten = REWRITERS[mode](grammar, classify(grammar))
    return eliminate_nulling(rewritten)
