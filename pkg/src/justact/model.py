"""JustAct statics over Slick: messages, actions, effects and permission.

This module only touches the policy language through parse/evaluate/validity,
``compose`` and the two reflection transformations, so another language with
the same surface could stand in for Slick.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Protocol, Sequence, Tuple

from .slick import (
    DEFAULT_BOUND,
    ERROR,
    Denotation,
    Fact,
    Policy,
    Rule,
    evaluate,
    parse_policy,
    render,
)

AgentId = Fact

SAYS = "says"
ACTOR = "actor"
VERBS = ("reads", "writes")


@dataclass(frozen=True)
class MessageId:
    author: AgentId
    seq: int

    def __str__(self) -> str:
        return f"{render(self.author)} {self.seq}"


@dataclass(frozen=True)
class Message:
    """An authored policy. Identity is (author, contents); seq is a label."""

    author: AgentId
    contents: Policy
    seq: int = field(default=0, compare=False)
    source: Optional[str] = field(default=None, compare=False, repr=False)

    @classmethod
    def of(cls, author: AgentId, text: str, seq: int = 0) -> "Message":
        return cls(author, parse_policy(text), seq, text)

    @property
    def id(self) -> MessageId:
        return MessageId(self.author, self.seq)

    @property
    def text(self) -> str:
        return self.source if self.source is not None else self.contents.render()

    def __str__(self) -> str:
        return str(self.id)

    def __repr__(self) -> str:
        return f"Message({self.id})"


@dataclass(frozen=True)
class Action:
    actor: AgentId
    basis: Message
    extra: Tuple[Message, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "extra", tuple(self.extra))

    def __str__(self) -> str:
        ids = ", ".join(str(m.id) for m in self.extra)
        return f"({render(self.actor)}, {self.basis.id}, [{ids}])"


@dataclass(frozen=True)
class Effect:
    affector: AgentId
    verb: str
    variable: Fact

    def __post_init__(self):
        if self.verb not in VERBS:
            raise ValueError(f"effect verb must be reads or writes, not {self.verb!r}")

    @property
    def fact(self) -> Fact:
        return (self.affector, self.verb, self.variable)

    @classmethod
    def from_fact(cls, fact: Fact) -> Optional["Effect"]:
        if isinstance(fact, tuple) and len(fact) == 3 and fact[1] in VERBS:
            return cls(fact[0], fact[1], fact[2])
        return None

    def __str__(self) -> str:
        return render(self.fact)


@dataclass(frozen=True)
class PermissionBreakdown:
    valid_act: bool
    sourced: bool
    based: bool
    unsourced: Tuple[str, ...] = ()

    @property
    def permitted(self) -> bool:
        return self.valid_act and self.sourced and self.based

    def to_json(self) -> dict:
        return {
            "valid": self.valid_act,
            "sourced": self.sourced,
            "based": self.based,
            "permitted": self.permitted,
            "unsourced": list(self.unsourced),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PermissionBreakdown":
        return cls(data["valid"], data["sourced"], data["based"], tuple(data["unsourced"]))


# --- reflection and extraction ---------------------------------------------

def reflect_author(rule: Rule, author: AgentId) -> Rule:
    return Rule((author, SAYS, rule.head), rule.body)


def reflect_actor(actor: AgentId) -> Message:
    return Message(actor, Policy((Rule((ACTOR, actor)),)), 0)


def dedupe(messages: Iterable[Message]) -> List[Message]:
    seen, out = set(), []
    for m in messages:
        if m not in seen:
            seen.add(m)
            out.append(m)
    return out


def extract(messages: Iterable[Message]) -> Policy:
    rules = []
    for m in dedupe(messages):
        for rule in m.contents:
            rules.append(rule)
            rules.append(reflect_author(rule, m.author))
    return Policy(tuple(rules))


def payload(action: Action) -> List[Message]:
    return [action.basis, reflect_actor(action.actor), *action.extra]


def denotation_of(action: Action, bound: int = DEFAULT_BOUND) -> Denotation:
    return evaluate(extract(payload(action)), bound)


def effects_in(denotation: Denotation) -> List[Effect]:
    found = (Effect.from_fact(f) for f in denotation.sorted_trues())
    return [e for e in found if e is not None]


def enum_effects_of(action: Action, bound: int = DEFAULT_BOUND) -> List[Effect]:
    # effect-of does not depend on validity
    return effects_in(denotation_of(action, bound))


def dec_valid_act(action: Action, bound: int = DEFAULT_BOUND) -> bool:
    return denotation_of(action, bound).valid


def error_reasons(denotation: Denotation) -> List[Fact]:
    """True facts of the form ``error Reason``, for diagnosing invalidity."""
    return [f for f in denotation.sorted_trues() if isinstance(f, tuple) and len(f) == 2 and f[0] == ERROR]


# --- permission ------------------------------------------------------------

class UnknownStatedness(Exception):
    def __init__(self, message: Message):
        super().__init__(f"cannot decide whether {message.id} is stated")
        self.message = message


class ConfigView(Protocol):
    """What an observer needs to decide permission."""

    agreed: Sequence[Message]

    def is_stated(self, message: Message) -> Optional[bool]:
        ...


@dataclass(frozen=True)
class PartialConfig:
    """Ad-hoc view: statedness known only for the listed messages."""

    agreed: Tuple[Message, ...] = ()
    stated: frozenset = frozenset()
    unstated: frozenset = frozenset()

    def is_stated(self, message: Message) -> Optional[bool]:
        if message in self.stated:
            return True
        if message in self.unstated:
            return False
        return None


def dec_permitted(config: ConfigView, action: Action, bound: int = DEFAULT_BOUND) -> PermissionBreakdown:
    actor_msg = reflect_actor(action.actor)
    unsourced = []
    for m in dedupe(payload(action)):
        if m == actor_msg:
            continue  # stated by the enactment itself
        known = config.is_stated(m)
        if known is None:
            raise UnknownStatedness(m)
        if not known:
            unsourced.append(str(m.id))
    based = action.basis in config.agreed
    return PermissionBreakdown(dec_valid_act(action, bound), not unsourced, based, tuple(unsourced))
