"""Slick terms: facts, atoms, conditions, rules and policies.

Facts are rosetrees over strings. A leaf is a plain ``str`` and a node is a
``tuple`` of facts, so facts are hashable and compare structurally for free.
Atoms are the same shape, except that leaves may also be :class:`Var`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Tuple, Union

Fact = Union[str, Tuple["Fact", ...]]
Atom = Union[str, "Var", Tuple["Atom", ...]]

ERROR: Fact = "error"

RESERVED = frozenset({"if", "and", "not", "same", "diff"})
_LEAF_FORBIDDEN = re.compile(r"[\s(){}.]|//")


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name})"


def is_variable_name(text: str) -> bool:
    return text[:1].isascii() and text[:1].isupper()


def check_leaf(text: str) -> None:
    if not text:
        raise ValueError("leaf text must be non-empty")
    if _LEAF_FORBIDDEN.search(text) or text in RESERVED:
        raise ValueError(f"invalid leaf text {text!r}")


def is_fact(value: object) -> bool:
    if isinstance(value, str):
        return True
    return isinstance(value, tuple) and all(is_fact(child) for child in value)


def variables(atom: Atom) -> Iterator[str]:
    """Yield variable names occurring in ``atom`` (with repeats, left to right)."""
    if isinstance(atom, Var):
        yield atom.name
    elif isinstance(atom, tuple):
        for child in atom:
            yield from variables(child)


def is_ground(atom: Atom) -> bool:
    return next(variables(atom), None) is None


def depth(fact: Fact) -> int:
    if isinstance(fact, str):
        return 0
    return 1 + max((depth(child) for child in fact), default=0)


def _render_term(atom: Atom) -> str:
    if isinstance(atom, Var):
        return atom.name
    if isinstance(atom, str):
        return atom
    return "(" + " ".join(_render_term(child) for child in atom) + ")"


def render(atom: Atom) -> str:
    """Render with the fewest parentheses that still parse back identically.

    The outermost node needs none (``x reads y``) unless it has fewer than two
    children, which would otherwise read back as a bare leaf.
    """
    if isinstance(atom, tuple) and len(atom) >= 2:
        return " ".join(_render_term(child) for child in atom)
    return _render_term(atom)


class Sign(Enum):
    POS = "pos"
    NEG = "neg"


class Kind(Enum):
    TRUE = "true"
    SAME = "same"
    DIFF = "diff"


@dataclass(frozen=True)
class Cond:
    sign: Sign
    kind: Kind
    atoms: Tuple[Atom, ...]

    def __post_init__(self):
        if self.kind is Kind.TRUE and len(self.atoms) != 1:
            raise ValueError("a truth condition holds exactly one atom")
        if self.kind is not Kind.TRUE and len(self.atoms) < 2:
            raise ValueError(f"{self.kind.value} needs at least two atoms")

    @classmethod
    def pos(cls, atom: Atom) -> "Cond":
        return cls(Sign.POS, Kind.TRUE, (atom,))

    @classmethod
    def neg(cls, atom: Atom) -> "Cond":
        return cls(Sign.NEG, Kind.TRUE, (atom,))

    @property
    def atom(self) -> Atom:
        return self.atoms[0]

    @property
    def binds(self) -> bool:
        return self.sign is Sign.POS and self.kind is Kind.TRUE

    def render(self) -> str:
        prefix = "not " if self.sign is Sign.NEG else ""
        if self.kind is Kind.TRUE:
            return prefix + render(self.atom)
        inner = " ".join(_render_term(a) for a in self.atoms)
        return f"{prefix}{self.kind.value} {{ {inner} }}"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: Tuple[Cond, ...] = ()

    def render(self) -> str:
        if not self.body:
            return render(self.head) + "."
        return render(self.head) + " if " + " and ".join(c.render() for c in self.body) + "."


@dataclass(frozen=True)
class Policy:
    rules: Tuple[Rule, ...] = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "_hash", hash(self.rules))

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __add__(self, other: "Policy") -> "Policy":
        return Policy(self.rules + other.rules)

    def render(self) -> str:
        return "\n".join(rule.render() for rule in self.rules)


def compose(p1: Policy, p2: Policy) -> Policy:
    return p1 + p2


def fact_to_atom(fact: Fact) -> Atom:
    # A fact is already an atom without variables.
    return fact


def atom_to_fact(atom: Atom) -> Fact:
    if not is_ground(atom):
        raise ValueError(f"atom {render(atom)!r} contains variables")
    return atom


def substitute(atom: Atom, binding: dict) -> Atom:
    if isinstance(atom, Var):
        return binding.get(atom.name, atom)
    if isinstance(atom, str):
        return atom
    return tuple(substitute(child, binding) for child in atom)
