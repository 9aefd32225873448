"""Reactive agent scripts.

A script is an ordered list of one-shot reactions, each guarded by a
conjunction of triggers. Triggers are evaluated against what the agent can
observe: its own view, the synchronised agreement list (and its history), and
the labels of applied enactments. ``step_agent`` is pure; the scheduler in
:mod:`justact.agents.scenarios` feeds its intents to the engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

from ..dataplane import AccessRequest
from ..model import Action, AgentId, Message, extract
from ..runtime import Agree, Enact, Forget, Gossip, State, Update
from ..slick import Fact, evaluate, render

ALL = "all"


# --- observation ---------------------------------------------------------------

@dataclass(frozen=True)
class Context:
    """Everything one agent may look at during its turn."""

    agent: AgentId
    view: Tuple[Message, ...]
    agreed: Tuple[Message, ...]
    history: Tuple[Tuple[str, ...], ...]  # agreed id-lists, one per applied Agree
    stated_ids: FrozenSet[str]
    enacted: Mapping[str, int]  # qualified label -> trace index
    assets: FrozenSet[Fact]
    statements: Mapping[str, Message]
    agents: Tuple[AgentId, ...]
    first_turn: bool = False
    agreement_changed: bool = False

    def truths(self) -> FrozenSet[Fact]:
        return evaluate(extract(self.view)).trues

    def viewed_ids(self) -> FrozenSet[str]:
        return frozenset(str(m.id) for m in self.view)


# --- triggers --------------------------------------------------------------------

@dataclass(frozen=True)
class OnStart:
    def holds(self, ctx: Context) -> bool:
        return ctx.first_turn


@dataclass(frozen=True)
class OnTruths:
    facts: Tuple[Fact, ...]

    def holds(self, ctx: Context) -> bool:
        trues = ctx.truths()
        return all(f in trues for f in self.facts)


@dataclass(frozen=True)
class OnAgreementChange:
    def holds(self, ctx: Context) -> bool:
        return ctx.agreement_changed


@dataclass(frozen=True)
class OnAgreed:
    ids: Tuple[str, ...]

    def holds(self, ctx: Context) -> bool:
        return tuple(str(m.id) for m in ctx.agreed) == self.ids


@dataclass(frozen=True)
class OnHistory:
    """The most recent agreement lists were exactly these, oldest first."""

    lists: Tuple[Tuple[str, ...], ...]

    def holds(self, ctx: Context) -> bool:
        n = len(self.lists)
        return len(ctx.history) >= n and ctx.history[len(ctx.history) - n:] == self.lists


@dataclass(frozen=True)
class OnEnacted:
    label: str

    def holds(self, ctx: Context) -> bool:
        return self.label in ctx.enacted


@dataclass(frozen=True)
class OnStated:
    ids: Tuple[str, ...]

    def holds(self, ctx: Context) -> bool:
        return all(i in ctx.stated_ids for i in self.ids)


@dataclass(frozen=True)
class OnViewed:
    ids: Tuple[str, ...]

    def holds(self, ctx: Context) -> bool:
        viewed = ctx.viewed_ids()
        return all(i in viewed for i in self.ids)


Trigger = Union[OnStart, OnTruths, OnAgreementChange, OnAgreed, OnHistory, OnEnacted, OnStated, OnViewed]

Intent = Union[Update, AccessRequest]


# --- reactions -------------------------------------------------------------------

def _recipients(spec, ctx: Context) -> List[AgentId]:
    targets = ctx.agents if spec == ALL else spec
    return [a for a in targets if a != ctx.agent]


@dataclass(frozen=True)
class StateAndGossip:
    statement: str
    recipients: Union[str, Tuple[AgentId, ...]] = ALL

    def plan(self, ctx: Context) -> Optional[List[Intent]]:
        m = ctx.statements[self.statement]
        out: List[Intent] = []
        if m not in ctx.view:
            out.append(State(ctx.agent, m))
        out.extend(Gossip(ctx.agent, r, m) for r in _recipients(self.recipients, ctx))
        return out


@dataclass(frozen=True)
class GossipTo:
    ids: Tuple[str, ...]
    recipients: Union[str, Tuple[AgentId, ...]] = ALL

    def plan(self, ctx: Context) -> Optional[List[Intent]]:
        ms = [ctx.statements[i] for i in self.ids]
        if any(m not in ctx.view for m in ms):
            return None
        return [Gossip(ctx.agent, r, m) for m in ms for r in _recipients(self.recipients, ctx)]


@dataclass(frozen=True)
class AllViewedExcept:
    ids: Tuple[str, ...] = ()


CURRENT = "current"


@dataclass(frozen=True)
class EnactUsing:
    label: str  # qualified, e.g. "amy/end"
    basis: str = CURRENT
    extras: Union[Tuple[str, ...], AllViewedExcept] = AllViewedExcept()

    def plan(self, ctx: Context) -> Optional[List[Intent]]:
        if self.basis == CURRENT:
            if not ctx.agreed:
                return None
            basis = ctx.agreed[0]
        else:
            basis = ctx.statements[self.basis]
        if basis not in ctx.view:
            return None
        if isinstance(self.extras, AllViewedExcept):
            skip = set(self.extras.ids)
            extra = [m for m in ctx.view if m != basis and str(m.id) not in skip]
        else:
            extra = [ctx.statements[i] for i in self.extras]
            if any(m not in ctx.view for m in extra):
                return None
        return [Enact(ctx.agent, Action(ctx.agent, basis, tuple(extra)), self.label)]


@dataclass(frozen=True)
class RequestAccess:
    """Realise effects of an own enactment; waits until every read asset exists."""

    action: str
    ops: Tuple[Tuple[str, Fact], ...]

    def plan(self, ctx: Context) -> Optional[List[Intent]]:
        ref = ctx.enacted.get(self.action)
        if ref is None:
            return None
        if any(verb == "read" and var not in ctx.assets for verb, var in self.ops):
            return None
        return [AccessRequest(ctx.agent, verb, var, ref) for verb, var in self.ops]


@dataclass(frozen=True)
class ForgetIds:
    ids: Tuple[str, ...]

    def plan(self, ctx: Context) -> Optional[List[Intent]]:
        ms = [ctx.statements[i] for i in self.ids]
        return [Forget(ctx.agent, m) for m in ms if m in ctx.view]


@dataclass(frozen=True)
class AgreeOn:
    """Authority only: state and broadcast fresh agreements, then agree."""

    ids: Tuple[str, ...]

    def plan(self, ctx: Context) -> Optional[List[Intent]]:
        ms = tuple(ctx.statements[i] for i in self.ids)
        out: List[Intent] = []
        for m in ms:
            if str(m.id) not in ctx.stated_ids:
                out.append(State(ctx.agent, m))
                out.extend(Gossip(ctx.agent, r, m) for r in _recipients(ALL, ctx))
        out.append(Agree(ctx.agent, ms))
        return out


Reaction = Union[StateAndGossip, GossipTo, EnactUsing, RequestAccess, ForgetIds, AgreeOn]


@dataclass(frozen=True)
class Entry:
    when: Tuple[Trigger, ...]
    then: Reaction


@dataclass(frozen=True)
class AgentScript:
    agent: AgentId
    reactions: Tuple[Entry, ...] = ()
    sequential: bool = False  # entries fire strictly in order (consortium program)

    def __str__(self) -> str:
        return f"script for {render(self.agent)} ({len(self.reactions)} reactions)"


def step_agent(script: AgentScript, ctx: Context, fired: FrozenSet[int] = frozenset()) -> Tuple[List[Intent], Tuple[int, ...]]:
    """Intents of every reaction that fires now, in reaction order, and their indices."""
    intents: List[Intent] = []
    now: List[int] = []
    for i, entry in enumerate(script.reactions):
        if i in fired:
            continue
        planned = None
        if all(t.holds(ctx) for t in entry.when):
            planned = entry.then.plan(ctx)
        if planned is not None:
            intents.extend(planned)
            now.append(i)
        elif script.sequential:
            break
    return intents, tuple(now)
