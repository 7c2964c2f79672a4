"""Brute-force reference implementations.

Everything here works directly from grammar definitions by exhaustive
search, and imports nothing from the rewrite, recognizer or evaluator
modules. Use it at desk scale only: a handful of symbols and inputs of up to
eight tokens.
"""

import collections
import dataclasses
import itertools
import logging
import random
from typing import Any, Callable, Iterator, Optional, Sequence

from chafparse import config
from chafparse.model.grammar_mod import Grammar, Rule, Symbol, augment


logger = logging.getLogger(__name__)

Sentence = tuple[str, ...]
RuleFunction = Callable[[Rule, tuple[Any, ...]], Any]
TokenFunction = Callable[[Symbol, Any], Any]
NulledFunction = Callable[[Symbol], Any]


class OracleError(Exception):
    """Raised when a brute-force search exceeds its configured limits."""


@dataclasses.dataclass(frozen=True)
class SentenceSet:
    """Every sentence of a grammar up to a maximum length."""

    max_len: int
    sentences: frozenset[Sentence]

    def __contains__(self, sentence: Sequence[str]) -> bool:
        return tuple(sentence) in self.sentences

    def __len__(self) -> int:
        return len(self.sentences)


def _names(tokens: Sequence[str | Symbol]) -> Sentence:
    return tuple(tok.name if isinstance(tok, Symbol) else tok for tok in tokens)


def _search(
    start: Any,
    expand: Callable[[Any], Iterator[Any]],
    is_goal: Callable[[Any], bool],
    step_bound: Optional[int] = None,
) -> bool:
    """Breadth-first search with a visited set."""
    visited = {start}
    frontier = [start]
    depth = 0
    while frontier:
        if any(is_goal(state) for state in frontier):
            return True
        if step_bound is not None and depth >= step_bound:
            return False
        next_frontier = []
        for state in frontier:
            for new_state in expand(state):
                if new_state not in visited:
                    visited.add(new_state)
                    next_frontier.append(new_state)
        frontier = next_frontier
        depth += 1
    return False


def bf_nullable(
    grammar: Grammar, symbol: Symbol, step_bound: Optional[int] = None
) -> bool:
    """Whether rewriting from ⟨symbol⟩ reaches the empty string.

    Sentential forms are abstracted to their sets of nonterminals: a form
    containing a terminal can never become empty, and copies of one
    nonterminal can all be rewritten the same way.
    """
    if symbol.is_terminal:
        return False
    if step_bound is None:
        step_bound = config.settings.oracle_step_bound

    def expand(form: frozenset[Symbol]) -> Iterator[frozenset[Symbol]]:
        for sym in form:
            for rule in grammar.rules_for(sym):
                if not any(rhs_sym.is_terminal for rhs_sym in rule.rhs):
                    yield (form - {sym}) | frozenset(rule.rhs)

    return _search(frozenset([symbol]), expand, lambda form: not form, step_bound)


def bf_productive(grammar: Grammar, symbol: Symbol) -> bool:
    """Whether `symbol` derives at least one terminal string."""
    if symbol.is_terminal:
        return True

    def expand(form: frozenset[Symbol]) -> Iterator[frozenset[Symbol]]:
        for sym in form:
            for rule in grammar.rules_for(sym):
                yield (form - {sym}) | frozenset(s for s in rule.rhs if not s.is_terminal)

    return _search(frozenset([symbol]), expand, lambda form: not form)


def _derives_nonempty(grammar: Grammar, symbol: Symbol) -> bool:
    """Whether `symbol` derives a terminal string of length one or more."""
    if symbol.is_terminal:
        return True
    State = tuple[frozenset[Symbol], bool]

    def expand(state: State) -> Iterator[State]:
        form, has_terminal = state
        for sym in form:
            for rule in grammar.rules_for(sym):
                nonterminals = frozenset(s for s in rule.rhs if not s.is_terminal)
                terminal_seen = has_terminal or len(nonterminals) < len(rule.rhs)
                yield ((form - {sym}) | nonterminals, terminal_seen)

    return _search(
        (frozenset([symbol]), False), expand, lambda state: not state[0] and state[1]
    )


def bf_nulling(grammar: Grammar, symbol: Symbol) -> bool:
    """Whether `symbol` is nullable and derives only the empty string."""
    return bf_nullable(grammar, symbol) and not _derives_nonempty(grammar, symbol)


def _bounded_languages(grammar: Grammar, max_len: int) -> dict[Symbol, set[Sentence]]:
    """Per-symbol sets of derivable terminal strings no longer than max_len."""
    languages: dict[Symbol, set[Sentence]] = {
        sym: ({(sym.name,)} if max_len >= 1 else set()) if sym.is_terminal else set()
        for sym in grammar.symbols
    }
    changed = True
    while changed:
        changed = False
        for rule in grammar.rules:
            strings: set[Sentence] = {()}
            for sym in rule.rhs:
                strings = {
                    head + tail
                    for head in strings
                    for tail in languages[sym]
                    if len(head) + len(tail) <= max_len
                }
                if not strings:
                    break
            new_strings = strings - languages[rule.lhs]
            if new_strings:
                languages[rule.lhs] |= new_strings
                changed = True
    return languages


def bf_language(grammar: Grammar, max_len: int) -> SentenceSet:
    """Exact set of sentences of length ≤ max_len."""
    if max_len > config.settings.oracle_max_len:
        raise OracleError(
            f"max_len {max_len} exceeds the oracle limit of"
            f" {config.settings.oracle_max_len}"
        )
    languages = _bounded_languages(grammar, max_len)
    return SentenceSet(max_len, frozenset(languages[grammar.root]))


def bf_recognize(grammar: Grammar, tokens: Sequence[str | Symbol]) -> bool:
    """Whether the token sequence is a sentence of the grammar."""
    sentence = _names(tokens)
    return sentence in bf_language(grammar, len(sentence))


def bf_prefixes(grammar: Grammar, max_len: int) -> dict[Symbol, set[Sentence]]:
    """Per-symbol sets of prefixes (length ≤ max_len) of derivable strings."""
    full = _bounded_languages(grammar, max_len)
    productive = {sym for sym in grammar.symbols if bf_productive(grammar, sym)}
    prefixes: dict[Symbol, set[Sentence]] = {}
    for sym in grammar.symbols:
        if sym.is_terminal:
            prefixes[sym] = {(), (sym.name,)} if max_len >= 1 else {()}
        else:
            prefixes[sym] = {()} if sym in productive else set()
    changed = True
    while changed:
        changed = False
        for rule in grammar.rules:
            if not all(sym in productive for sym in rule.rhs):
                continue
            found: set[Sentence] = set()
            heads: set[Sentence] = {()}
            for sym in rule.rhs:
                found |= {
                    head + tail
                    for head in heads
                    for tail in prefixes[sym]
                    if len(head) + len(tail) <= max_len
                }
                heads = {
                    head + tail
                    for head in heads
                    for tail in full[sym]
                    if len(head) + len(tail) <= max_len
                }
            new_prefixes = found - prefixes[rule.lhs]
            if new_prefixes:
                prefixes[rule.lhs] |= new_prefixes
                changed = True
    return prefixes


def bf_acceptable_tokens(
    grammar: Grammar, prefix: Sequence[str | Symbol]
) -> frozenset[Symbol]:
    """Terminals t such that prefix·t is a prefix of some sentence."""
    names = _names(prefix)
    prefixes = bf_prefixes(grammar, len(names) + 1)[grammar.root]
    return frozenset(
        term for term in grammar.terminals if names + (term.name,) in prefixes
    )


def bf_cyclic(grammar: Grammar) -> bool:
    """Whether some nonterminal derives itself alone (X ⇒+ X)."""
    nullable = {sym for sym in grammar.nonterminals if bf_nullable(grammar, sym)}
    unit_edges: dict[Symbol, set[Symbol]] = collections.defaultdict(set)
    for rule in grammar.rules:
        for pos, sym in enumerate(rule.rhs):
            others = rule.rhs[:pos] + rule.rhs[pos + 1 :]
            if not sym.is_terminal and all(other in nullable for other in others):
                unit_edges[rule.lhs].add(sym)
    for origin in grammar.nonterminals:
        stack = list(unit_edges[origin])
        seen: set[Symbol] = set()
        while stack:
            sym = stack.pop()
            if sym == origin:
                return True
            if sym not in seen:
                seen.add(sym)
                stack.extend(unit_edges[sym])
    return False


def _splits(start: int, end: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Boundaries dividing [start, end) into `parts` consecutive spans."""
    if parts == 0:
        if start == end:
            yield (start,)
        return
    for cuts in itertools.combinations_with_replacement(range(start, end + 1), parts - 1):
        yield (start, *cuts, end)


def bf_parse_values(
    grammar: Grammar,
    tokens: Sequence[str | Symbol],
    rule_function: RuleFunction,
    token_function: Optional[TokenFunction] = None,
    nulled_function: Optional[NulledFunction] = None,
    limit: Optional[int] = None,
) -> collections.Counter:
    """Multiset of root values over every derivation tree of the input.

    Trees are rooted at the start symbol: the accept rule passes its child's
    value through. A nonterminal that spans no input is a single nulled leaf,
    whatever its internal derivation. A tree in which a (symbol, span) node
    has an identical node as a proper descendant is cyclic and is skipped.
    """
    sentence = _names(tokens)
    limit = config.settings.max_parse_trees if limit is None else limit
    token_function = token_function or (lambda _symbol, value: value)
    nulled_function = nulled_function or (lambda symbol: ("nulled", symbol.name))
    nullable = {sym for sym in grammar.nonterminals if bf_nullable(grammar, sym)}
    tree_count = 0

    def values(sym: Symbol, start: int, end: int, path: frozenset) -> list[Any]:
        nonlocal tree_count
        if sym.is_terminal:
            if end == start + 1 and sentence[start] == sym.name:
                return [token_function(sym, sentence[start])]
            return []
        if start == end:
            return [nulled_function(sym)] if sym in nullable else []
        if (sym, start, end) in path:
            return []
        path = path | {(sym, start, end)}
        results: list[Any] = []
        for rule in grammar.rules_for(sym):
            for bounds in _splits(start, end, len(rule.rhs)):
                child_values = []
                for child, child_start, child_end in zip(
                    rule.rhs, bounds, bounds[1:]
                ):
                    found = values(child, child_start, child_end, path)
                    if not found:
                        break
                    child_values.append(found)
                else:
                    for children in itertools.product(*child_values):
                        results.append(rule_function(rule, tuple(children)))
                        tree_count += 1
                        if tree_count > limit:
                            raise OracleError(
                                f"More than {limit} derivation trees for {sentence}"
                            )
        return results

    return collections.Counter(values(grammar.start, 0, len(sentence), frozenset()))


def reference_chart(
    grammar: Grammar, tokens: Sequence[str | Symbol]
) -> list[frozenset[tuple[Rule, int, int]]]:
    """Naive Earley chart built by repeated passes to a fixed point.

    Each set holds (rule, dot position, origin) triples. Set 0 is seeded with
    the accept rule's initial dotted rule.
    """
    sentence = _names(tokens)
    seed_rule = grammar.accept_rule
    sets: list[set[tuple[Rule, int, int]]] = [set() for _ in range(len(sentence) + 1)]
    if seed_rule is not None:
        sets[0].add((seed_rule, 0, 0))
    for location, earley_set in enumerate(sets):
        changed = True
        while changed:
            changed = False
            for rule, pos, origin in list(earley_set):
                if pos < len(rule.rhs):
                    postdot = rule.rhs[pos]
                    new_items = [
                        (predicted, 0, location)
                        for predicted in grammar.rules_for(postdot)
                    ]
                else:
                    new_items = [
                        (main_rule, main_pos + 1, main_origin)
                        for main_rule, main_pos, main_origin in list(sets[origin])
                        if main_pos < len(main_rule.rhs)
                        and main_rule.rhs[main_pos] == rule.lhs
                    ]
                for item in new_items:
                    if item not in earley_set:
                        earley_set.add(item)
                        changed = True
        if location < len(sentence):
            for rule, pos, origin in earley_set:
                if pos < len(rule.rhs) and rule.rhs[pos].name == sentence[location]:
                    if rule.rhs[pos].is_terminal:
                        sets[location + 1].add((rule, pos + 1, origin))
    return [frozenset(earley_set) for earley_set in sets]


def random_grammar(
    rng: random.Random,
    max_symbols: int = 6,
    max_rules: int = 10,
    max_rhs: int = 4,
    allow_empty_rules: bool = True,
    all_productive: bool = False,
) -> Grammar:
    """Generate a random augmented grammar from a seeded generator.

    Every nonterminal gets at least one rule. With `all_productive`, rules of
    the form X ::= t are added for nonterminals that derive no terminal string.
    """
    nonterminal_count = rng.randint(1, max(1, max_symbols - 1))
    terminal_count = max(1, max_symbols - nonterminal_count)
    nonterminals = [Symbol("S")] + [
        Symbol(chr(ord("A") + idx)) for idx in range(nonterminal_count - 1)
    ]
    terminals = [Symbol(chr(ord("a") + idx), True) for idx in range(terminal_count)]
    vocabulary = nonterminals + terminals
    min_rhs = 0 if allow_empty_rules else 1
    rules: dict[Rule, None] = {}
    rule_count = rng.randint(nonterminal_count, max(nonterminal_count, max_rules))
    for idx in range(rule_count):
        lhs = nonterminals[idx] if idx < nonterminal_count else rng.choice(nonterminals)
        rhs = tuple(
            rng.choice(vocabulary) for _ in range(rng.randint(min_rhs, max_rhs))
        )
        rules.setdefault(Rule(lhs, rhs))
    for lhs in nonterminals:
        if not any(rule.lhs == lhs for rule in rules):
            rules.setdefault(Rule(lhs, (rng.choice(terminals),)))
    grammar = Grammar(tuple(vocabulary), tuple(rules), nonterminals[0])
    if all_productive:
        for lhs in nonterminals:
            if not bf_productive(grammar, lhs):
                rules.setdefault(Rule(lhs, (rng.choice(terminals),)))
        grammar = Grammar(tuple(vocabulary), tuple(rules), nonterminals[0])
    logger.debug("Random grammar:\n%s", grammar)
    return augment(grammar)
