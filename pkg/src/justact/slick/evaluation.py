"""Well-founded evaluation of Slick policies by the alternating fixpoint.

``gamma(S)`` is the least model of the policy in which ``not f`` holds iff
``f`` is not in ``S``. Starting from ``T = {}``, the evaluator alternates
``U = gamma(T)`` (an over-estimate of the truths) and ``T = gamma(U)`` (an
under-estimate) until ``T`` stops changing. Then ``T`` holds the true facts and
``U - T`` the unknown ones.

One inference step is one derivation of a ground fact that is new within the
current ``gamma`` pass; steps accumulate across passes. Exceeding the bound
trivialises the denotation to ``{error}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from .terms import ERROR, Atom, Cond, Fact, Kind, Policy, Rule, Sign, Var, render, substitute, variables

DEFAULT_BOUND = 30_000

Binding = Dict[str, Fact]


class _Node(tuple):
    """Tuple that caches its hash; derived facts can nest thousands deep."""

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            self._h = tuple.__hash__(self)
            return self._h


def _build(atom: Atom, binding: Binding) -> Atom:
    if isinstance(atom, Var):
        return binding.get(atom.name, atom)
    if isinstance(atom, str):
        return atom
    return _Node(_build(child, binding) for child in atom)


@dataclass(frozen=True)
class Denotation:
    trues: FrozenSet[Fact]
    unknowns: FrozenSet[Fact] = frozenset()
    bound_exceeded: bool = False
    steps_used: int = 0

    @property
    def valid(self) -> bool:
        return ERROR not in self.trues

    def sorted_trues(self) -> List[Fact]:
        return sorted(self.trues, key=render)

    def sorted_unknowns(self) -> List[Fact]:
        return sorted(self.unknowns, key=render)


class BoundExceeded(Exception):
    pass


def match(pattern: Atom, fact: Fact, binding: Binding) -> Optional[Binding]:
    """Extend ``binding`` so that ``pattern`` equals ``fact``, or return None."""
    if isinstance(pattern, str):
        return binding if pattern == fact else None
    if isinstance(pattern, Var):
        bound = binding.get(pattern.name)
        if bound is None:
            extended = dict(binding)
            extended[pattern.name] = fact
            return extended
        return binding if bound == fact else None
    if not isinstance(fact, tuple) or len(fact) != len(pattern):
        return None
    for sub_pattern, sub_fact in zip(pattern, fact):
        binding = match(sub_pattern, sub_fact, binding)
        if binding is None:
            return None
    return binding


class FactIndex:
    """Insertion-ordered fact set indexed by arity and by ground children."""

    def __init__(self, facts: Iterable[Fact] = ()):
        self.facts: List[Fact] = []
        self.members: set = set()
        self.by_arity: Dict[int, List[Fact]] = {}
        self.by_child: Dict[Tuple[int, int, Fact], List[Fact]] = {}
        for fact in facts:
            self.add(fact)

    def __contains__(self, fact: Fact) -> bool:
        return fact in self.members

    def __len__(self) -> int:
        return len(self.facts)

    def add(self, fact: Fact) -> bool:
        if fact in self.members:
            return False
        self.members.add(fact)
        self.facts.append(fact)
        if isinstance(fact, tuple):
            n = len(fact)
            self.by_arity.setdefault(n, []).append(fact)
            for i, child in enumerate(fact):
                self.by_child.setdefault((n, i, child), []).append(fact)
        return True

    def candidates(self, pattern: Atom) -> List[Fact]:
        if isinstance(pattern, Var):
            return self.facts
        if isinstance(pattern, str):
            return [pattern] if pattern in self.members else []
        n = len(pattern)
        best = self.by_arity.get(n, [])
        for i, child in enumerate(pattern):
            if _ground(child):
                bucket = self.by_child.get((n, i, child), [])
                if len(bucket) < len(best):
                    best = bucket
                    if not best:
                        break
        return best


def _ground(atom: Atom) -> bool:
    if isinstance(atom, str):
        return True
    if isinstance(atom, Var):
        return False
    return all(_ground(child) for child in atom)


_FRESH = "\x00fresh"


def _unify(a: Atom, b: Atom, binding: dict) -> Optional[dict]:
    a, b = _walk(a, binding), _walk(b, binding)
    if a == b:
        return binding
    if isinstance(a, Var):
        return {**binding, a.name: b}
    if isinstance(b, Var):
        return {**binding, b.name: a}
    if isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b):
        for x, y in zip(a, b):
            binding = _unify(x, y, binding)
            if binding is None:
                return None
        return binding
    return None


def _walk(atom: Atom, binding: dict) -> Atom:
    while isinstance(atom, Var) and atom.name in binding:
        atom = binding[atom.name]
    return atom


def _resolve(atom: Atom, binding: dict) -> Atom:
    atom = _walk(atom, binding)
    if isinstance(atom, tuple):
        return tuple(_resolve(child, binding) for child in atom)
    return atom


def _close(conds: Tuple[Cond, ...], binding: Binding) -> Optional[Binding]:
    """Ground the variables left free after the positive truth conditions.

    Free variables are existential over an infinite universe: positive
    ``same`` lists unify first, and whatever remains takes a fresh constant.
    """
    free = {v for c in conds for a in c.atoms for v in variables(a)} - binding.keys()
    if not free:
        return binding
    partial: dict = dict(binding)
    for cond in conds:
        if cond.kind is Kind.SAME and cond.sign is Sign.POS:
            first = cond.atoms[0]
            for other in cond.atoms[1:]:
                partial = _unify(first, other, partial)
                if partial is None:
                    return None
    for name in sorted(free):
        if name not in partial:
            partial[name] = _FRESH + name
    return {name: _resolve(Var(name), partial) for name in binding.keys() | free}


def _holds(cond: Cond, binding: Binding, negatives_against: "FactIndex | FrozenSet[Fact]") -> bool:
    if cond.kind is Kind.TRUE:
        fact = substitute(cond.atom, binding)
        present = fact in negatives_against
        return present if cond.sign is Sign.POS else not present
    facts = [substitute(a, binding) for a in cond.atoms]
    if cond.kind is Kind.SAME:
        result = all(f == facts[0] for f in facts[1:])
    else:
        result = len(set(facts)) == len(facts)
    return result if cond.sign is Sign.POS else not result


class _Compiled:
    __slots__ = ("rule", "positives", "others")

    def __init__(self, rule: Rule):
        self.rule = rule
        self.positives = tuple(c.atom for c in rule.body if c.binds)
        self.others = tuple(c for c in rule.body if not c.binds)


class _Counter:
    def __init__(self, bound: int):
        self.bound = bound
        self.steps = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.bound:
            raise BoundExceeded()


def _join(patterns: List[Atom], binding: Binding, full: FactIndex) -> Iterator[Binding]:
    if not patterns:
        yield binding
        return
    # bind the most selective remaining pattern first
    best_i, best_cands = 0, None
    for i, pattern in enumerate(patterns):
        cands = full.candidates(substitute(pattern, binding))
        if best_cands is None or len(cands) < len(best_cands):
            best_i, best_cands = i, cands
            if not cands:
                return
    pattern = patterns[best_i]
    rest = patterns[:best_i] + patterns[best_i + 1:]
    for fact in list(best_cands):
        extended = match(pattern, fact, binding)
        if extended is not None:
            yield from _join(rest, extended, full)


def _fire(rule: _Compiled, bindings: Iterable[Binding], assumed: "FactIndex | FrozenSet[Fact]") -> Iterator[Fact]:
    for binding in bindings:
        closed = _close(rule.others, binding)
        if closed is None:
            continue
        if all(_holds(c, closed, assumed) for c in rule.others):
            yield _build(rule.rule.head, closed)


def gamma(rules: List[_Compiled], assumed: FrozenSet[Fact], counter: _Counter) -> FrozenSet[Fact]:
    """Least model where ``not f`` holds iff ``f`` is outside ``assumed``."""
    full = FactIndex()

    def derive(fact: Fact, into: List[Fact], seen: set):
        if fact not in full and fact not in seen:
            seen.add(fact)
            into.append(fact)
            counter.tick()

    delta: List[Fact] = []
    seen: set = set()
    for rule in rules:
        if not rule.positives:
            for fact in _fire(rule, [{}], assumed):
                derive(fact, delta, seen)
    while delta:
        for fact in delta:
            full.add(fact)
        delta_index = FactIndex(delta)
        new: List[Fact] = []
        seen = set()
        for rule in rules:
            pats = rule.positives
            for k in range(len(pats)):
                rest = list(pats[:k] + pats[k + 1:])
                for fact in delta_index.candidates(pats[k]):
                    start = match(pats[k], fact, {})
                    if start is None:
                        continue
                    for head in _fire(rule, _join(rest, start, full), assumed):
                        derive(head, new, seen)
        delta = new
    return frozenset(full.facts)


def _evaluate(policy: Policy, step_bound: int) -> Denotation:
    rules = [_Compiled(rule) for rule in policy.rules]
    counter = _Counter(step_bound)
    try:
        trues: FrozenSet[Fact] = frozenset()
        while True:
            possible = gamma(rules, trues, counter)
            following = gamma(rules, possible, counter)
            if following == trues:
                break
            trues = following
    except BoundExceeded:
        return Denotation(frozenset({ERROR}), frozenset(), True, counter.steps)
    return Denotation(trues, possible - trues, False, counter.steps)


@lru_cache(maxsize=4096)
def evaluate(policy: Policy, step_bound: int = DEFAULT_BOUND) -> Denotation:
    """Evaluate ``policy`` under the well-founded semantics with a step bound."""
    if step_bound < 1:
        raise ValueError("step_bound must be at least 1")
    return _evaluate(policy, step_bound)


def truth(policy: Policy, fact: Fact, step_bound: int = DEFAULT_BOUND) -> bool:
    return fact in evaluate(policy, step_bound).trues


def dec_valid(policy: Policy, step_bound: int = DEFAULT_BOUND) -> bool:
    return evaluate(policy, step_bound).valid
