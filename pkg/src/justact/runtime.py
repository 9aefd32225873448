"""Configurations, views, the five updates, and the append-only trace.

The engine never blocks a prohibited enactment (unless ``strict``); it logs
the permission decision so that anyone can audit it afterwards by replaying
the trace.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from . import dataplane
from .dataplane import AccessRequest, AssetStore, Denied, Granted
from .model import (
    Action,
    AgentId,
    Effect,
    Message,
    PermissionBreakdown,
    dec_permitted,
    enum_effects_of,
    payload,
    reflect_actor,
)
from .slick import DEFAULT_BOUND, parse_fact, parse_policy, render

AUTHORITY = "consortium"

# rejection reasons
NOT_AUTHOR = "NotAuthor"
ALREADY_VIEWED = "AlreadyViewed"
PAYLOAD_NOT_VIEWED = "PayloadNotViewed"
BAD_GOSSIP = "BadGossip"
NOT_VIEWED = "NotViewed"
NOT_ACTOR = "NotActor"
NOT_AUTHORITY = "NotAuthority"
DUPLICATE_ID = "DuplicateId"
PROHIBITED = "Prohibited"


@dataclass(frozen=True)
class Config:
    enacted: Tuple[Action, ...] = ()
    stated: FrozenSet[Message] = frozenset()
    agreed: Tuple[Message, ...] = ()

    def is_stated(self, message: Message) -> bool:
        return message in self.stated


@dataclass(frozen=True)
class SystemState:
    config: Config = Config()
    views: Tuple[Tuple[AgentId, Tuple[Message, ...]], ...] = ()

    def view(self, agent: AgentId) -> Tuple[Message, ...]:
        for who, messages in self.views:
            if who == agent:
                return messages
        return ()

    def with_view(self, agent: AgentId, messages: Tuple[Message, ...]) -> "SystemState":
        views = [(who, ms) for who, ms in self.views if who != agent]
        views.append((agent, messages))
        views.sort(key=lambda pair: render(pair[0]))
        return replace(self, views=tuple(views))

    def accurate(self) -> bool:
        return all(m in self.config.stated for _, ms in self.views for m in ms)


def initial() -> SystemState:
    return SystemState()


# --- updates -----------------------------------------------------------------

@dataclass(frozen=True)
class State:
    issuer: AgentId
    message: Message


@dataclass(frozen=True)
class Enact:
    issuer: AgentId
    action: Action
    label: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Agree:
    issuer: AgentId
    messages: Tuple[Message, ...]


@dataclass(frozen=True)
class Gossip:
    sender: AgentId
    recipient: AgentId
    message: Message

    @property
    def issuer(self) -> AgentId:
        return self.sender


@dataclass(frozen=True)
class Forget:
    agent: AgentId
    message: Message

    @property
    def issuer(self) -> AgentId:
        return self.agent


Update = Union[State, Enact, Agree, Gossip, Forget]


@dataclass(frozen=True)
class TraceEvent:
    index: int
    plane: str  # "control" or "data-plane"
    outcome: str  # applied/rejected for control, granted/denied for data
    update: Optional[Update] = None
    request: Optional[AccessRequest] = None
    reason: Optional[str] = None
    permission: Optional[PermissionBreakdown] = None
    effects: Optional[Tuple[Effect, ...]] = None
    digest: Optional[str] = None

    @property
    def is_applied_enact(self) -> bool:
        return self.outcome == "applied" and isinstance(self.update, Enact)

    def to_json(self) -> dict:
        return event_to_json(self)


class ReplayDivergence(Exception):
    def __init__(self, index: int, expected: str, actual: str):
        super().__init__(f"replay diverges at event {index}")
        self.index = index
        self.expected = expected
        self.actual = actual


class NotAnEnactment(Exception):
    pass


def _add(view: Tuple[Message, ...], m: Message) -> Tuple[Message, ...]:
    return view if m in view else view + (m,)


def _id_clash(config: Config, m: Message) -> bool:
    return any(s.author == m.author and s.seq == m.seq and s != m for s in config.stated if s.seq)


def apply_update(
    state: SystemState,
    update: Update,
    *,
    authority: AgentId = AUTHORITY,
    strict: bool = False,
    bound: int = DEFAULT_BOUND,
) -> Tuple[SystemState, str, Optional[str], Optional[PermissionBreakdown], Optional[Tuple[Effect, ...]]]:
    """Returns (state', outcome, reason, permission, effects)."""

    def reject(reason):
        return state, "rejected", reason, None, None

    config = state.config
    if isinstance(update, State):
        m = update.message
        if update.issuer != m.author:
            return reject(NOT_AUTHOR)
        if m in state.view(m.author):
            return reject(ALREADY_VIEWED)
        if _id_clash(config, m):
            return reject(DUPLICATE_ID)
        config = replace(config, stated=config.stated | {m})
        new = replace(state, config=config).with_view(m.author, _add(state.view(m.author), m))
        return new, "applied", None, None, None

    if isinstance(update, Enact):
        a = update.action
        if update.issuer != a.actor:
            return reject(NOT_ACTOR)
        view = state.view(a.actor)
        actor_msg = reflect_actor(a.actor)
        if any(m not in view for m in payload(a) if m != actor_msg):
            return reject(PAYLOAD_NOT_VIEWED)
        after = replace(config, enacted=config.enacted + (a,), stated=config.stated | set(payload(a)))
        permission = dec_permitted(after, a, bound)
        effects = tuple(enum_effects_of(a, bound))
        if strict and not permission.permitted:
            return state, "rejected", PROHIBITED, permission, effects
        return replace(state, config=after), "applied", None, permission, effects

    if isinstance(update, Agree):
        if update.issuer != authority:
            return reject(NOT_AUTHORITY)
        return replace(state, config=replace(config, agreed=tuple(update.messages))), "applied", None, None, None

    if isinstance(update, Gossip):
        m = update.message
        if m not in state.view(update.sender):
            return reject(BAD_GOSSIP)
        if m in state.view(update.recipient):
            return reject(ALREADY_VIEWED)
        return state.with_view(update.recipient, state.view(update.recipient) + (m,)), "applied", None, None, None

    if isinstance(update, Forget):
        view = state.view(update.agent)
        if update.message not in view:
            return reject(NOT_VIEWED)
        return state.with_view(update.agent, tuple(m for m in view if m != update.message)), "applied", None, None, None

    raise TypeError(f"not an update: {update!r}")


# --- engine ------------------------------------------------------------------

class Engine:
    """Single-threaded holder of the system state, asset store and trace."""

    def __init__(self, authority: AgentId = AUTHORITY, strict: bool = False, bound: int = DEFAULT_BOUND):
        self.authority = authority
        self.strict = strict
        self.bound = bound
        self.state = initial()
        self.store = AssetStore()
        self.events: List[TraceEvent] = []

    def submit(self, update: Update) -> TraceEvent:
        self.state, outcome, reason, permission, effects = apply_update(
            self.state, update, authority=self.authority, strict=self.strict, bound=self.bound
        )
        event = TraceEvent(len(self.events), "control", outcome, update=update, reason=reason,
                           permission=permission, effects=effects)
        self.events.append(event)
        return event

    def access(self, req: AccessRequest) -> TraceEvent:
        index = len(self.events)
        result = dataplane.request_access(self.store, self.events, req, index)
        if isinstance(result, Granted):
            event = TraceEvent(index, "data-plane", "granted", request=req, digest=dataplane.digest(result.content))
        else:
            event = TraceEvent(index, "data-plane", "denied", request=req, reason=result.reason)
        self.events.append(event)
        return event

    def apply_event(self, event: TraceEvent) -> TraceEvent:
        if event.plane == "control":
            return self.submit(event.update)
        return self.access(event.request)


def replay(events: Sequence[TraceEvent], **engine_options) -> Engine:
    """Re-run every recorded update; raise at the first outcome that differs."""
    engine = Engine(**engine_options)
    for position, event in enumerate(events):
        if event.index != position:
            raise ReplayDivergence(position, f"index {position}", f"index {event.index}")
        again = engine.apply_event(event)
        expected, actual = dumps(event), dumps(again)
        if expected != actual:
            raise ReplayDivergence(position, expected, actual)
    return engine


def snapshots(events: Sequence[TraceEvent], **engine_options) -> Iterable[Tuple[TraceEvent, SystemState]]:
    """Yield each event with the system state right after it."""
    engine = Engine(**engine_options)
    for event in events:
        engine.apply_event(event)
        yield event, engine.state


# --- audit -------------------------------------------------------------------

@dataclass(frozen=True)
class AuditReport:
    index: int
    actor: str
    label: Optional[str]
    action: str
    payload: Tuple[Tuple[str, str], ...]  # (id, Slick text)
    permission: PermissionBreakdown
    basis: str
    agreed: Tuple[str, ...]
    errors: Tuple[str, ...]
    effects: Tuple[str, ...]
    accesses: Tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "actor": self.actor,
            "label": self.label,
            "action": self.action,
            "payload": [{"id": i, "text": t} for i, t in self.payload],
            "permission": self.permission.to_json(),
            "basis": self.basis,
            "agreed": list(self.agreed),
            "errors": list(self.errors),
            "effects": list(self.effects),
            "accesses": list(self.accesses),
        }

    def render(self) -> str:
        p = self.permission
        lines = [
            f"[{self.index}] {self.actor} enacts {self.action}" + (f" ({self.label})" if self.label else ""),
            f"  permitted: {p.permitted}",
            f"  valid:     {p.valid_act}" + ("" if p.valid_act else "  errors: " + "; ".join(self.errors)),
            f"  sourced:   {p.sourced}" + ("" if p.sourced else "  unsourced: " + ", ".join(p.unsourced)),
            f"  based:     {p.based}  basis {self.basis} in agreed [{', '.join(self.agreed)}]",
            "  payload:",
        ]
        for mid, text in self.payload:
            lines.append(f"    {mid}:")
            lines.extend("      " + line for line in text.strip().splitlines())
        lines.append("  effects:")
        lines.extend(f"    {e}" for e in self.effects or ["(none)"])
        if self.accesses:
            lines.append("  accesses:")
            lines.extend(f"    {a}" for a in self.accesses)
        return "\n".join(lines)


def audit(events: Sequence[TraceEvent], index: int, **engine_options) -> AuditReport:
    if not (0 <= index < len(events)) or not events[index].is_applied_enact:
        raise NotAnEnactment(f"event {index} is not an applied enactment")
    from .model import denotation_of, error_reasons

    engine = replay(events[: index + 1], **engine_options)
    event = events[index]
    a = event.update.action
    denotation = denotation_of(a, engine.bound)
    accesses = tuple(
        f"[{e.index}] {render(e.request.agent)} {e.request.verb} {render(e.request.variable)}: "
        + (e.outcome if e.reason is None else f"{e.outcome} ({e.reason})")
        for e in events
        if e.plane == "data-plane" and e.request.action_ref == index
    )
    return AuditReport(
        index=index,
        actor=render(a.actor),
        label=event.update.label,
        action=str(a),
        payload=tuple((str(m.id), m.text) for m in payload(a)),
        permission=event.permission,
        basis=str(a.basis.id),
        agreed=tuple(str(m.id) for m in engine.state.config.agreed),
        errors=tuple(render(f) for f in error_reasons(denotation)),
        effects=tuple(str(e) for e in event.effects),
        accesses=accesses,
    )


def audit_all(events: Sequence[TraceEvent], **engine_options) -> List[AuditReport]:
    return [audit(events, e.index, **engine_options) for e in events if e.is_applied_enact]


def correspondence_violations(events: Sequence[TraceEvent]) -> List[int]:
    """Indices of granted accesses lacking a matching enacted effect."""
    bad = []
    for e in events:
        if e.plane != "data-plane" or e.outcome != "granted":
            continue
        ref = e.request.action_ref
        target = events[ref] if 0 <= ref < e.index else None
        if target is None or not target.is_applied_enact or e.request.effect not in target.effects:
            bad.append(e.index)
    return bad


# --- JSON lines --------------------------------------------------------------

def message_to_json(m: Message) -> dict:
    return {"author": render(m.author), "seq": m.seq, "text": m.text}


def message_from_json(data: dict) -> Message:
    return Message(parse_fact(data["author"]), parse_policy(data["text"]), data["seq"], data["text"])


def action_to_json(a: Action) -> dict:
    return {
        "actor": render(a.actor),
        "basis": message_to_json(a.basis),
        "extra": [message_to_json(m) for m in a.extra],
    }


def action_from_json(data: dict) -> Action:
    return Action(parse_fact(data["actor"]), message_from_json(data["basis"]),
                  tuple(message_from_json(m) for m in data["extra"]))


def update_to_json(u: Update) -> dict:
    if isinstance(u, State):
        return {"kind": "state", "issuer": render(u.issuer), "message": message_to_json(u.message)}
    if isinstance(u, Enact):
        return {"kind": "enact", "issuer": render(u.issuer), "label": u.label, "action": action_to_json(u.action)}
    if isinstance(u, Agree):
        return {"kind": "agree", "issuer": render(u.issuer), "messages": [message_to_json(m) for m in u.messages]}
    if isinstance(u, Gossip):
        return {"kind": "gossip", "from": render(u.sender), "to": render(u.recipient),
                "message": message_to_json(u.message)}
    if isinstance(u, Forget):
        return {"kind": "forget", "agent": render(u.agent), "message": message_to_json(u.message)}
    raise TypeError(u)


def update_from_json(data: dict) -> Update:
    kind = data["kind"]
    if kind == "state":
        return State(parse_fact(data["issuer"]), message_from_json(data["message"]))
    if kind == "enact":
        return Enact(parse_fact(data["issuer"]), action_from_json(data["action"]), data.get("label"))
    if kind == "agree":
        return Agree(parse_fact(data["issuer"]), tuple(message_from_json(m) for m in data["messages"]))
    if kind == "gossip":
        return Gossip(parse_fact(data["from"]), parse_fact(data["to"]), message_from_json(data["message"]))
    if kind == "forget":
        return Forget(parse_fact(data["agent"]), message_from_json(data["message"]))
    raise ValueError(f"unknown update kind {kind!r}")


def request_to_json(r: AccessRequest) -> dict:
    out = {"agent": render(r.agent), "verb": r.verb, "variable": render(r.variable), "action": r.action_ref}
    if r.content is not None:
        out["content"] = r.content.decode("latin-1")
    return out


def request_from_json(data: dict) -> AccessRequest:
    content = data.get("content")
    return AccessRequest(parse_fact(data["agent"]), data["verb"], parse_fact(data["variable"]), data["action"],
                         None if content is None else content.encode("latin-1"))


def event_to_json(e: TraceEvent) -> dict:
    out = {"index": e.index, "plane": e.plane, "outcome": e.outcome}
    if e.reason is not None:
        out["reason"] = e.reason
    if e.plane == "control":
        out["update"] = update_to_json(e.update)
        if e.permission is not None:
            out["permission"] = e.permission.to_json()
        if e.effects is not None:
            out["effects"] = [str(x) for x in e.effects]
    else:
        out["request"] = request_to_json(e.request)
        if e.digest is not None:
            out["digest"] = e.digest
    return out


def event_from_json(data: dict) -> TraceEvent:
    if data["plane"] == "control":
        permission = data.get("permission")
        effects = data.get("effects")
        return TraceEvent(
            data["index"], "control", data["outcome"],
            update=update_from_json(data["update"]),
            reason=data.get("reason"),
            permission=None if permission is None else PermissionBreakdown.from_json(permission),
            effects=None if effects is None else tuple(Effect.from_fact(parse_fact(x)) for x in effects),
        )
    return TraceEvent(data["index"], "data-plane", data["outcome"], request=request_from_json(data["request"]),
                      reason=data.get("reason"), digest=data.get("digest"))


def dumps(event: TraceEvent) -> str:
    return json.dumps(event_to_json(event), sort_keys=True, ensure_ascii=False)


def write_trace(events: Iterable[TraceEvent], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in events:
            fh.write(dumps(e) + "\n")


def read_trace(path) -> List[TraceEvent]:
    with open(path, encoding="utf-8") as fh:
        return [event_from_json(json.loads(line)) for line in fh if line.strip()]
