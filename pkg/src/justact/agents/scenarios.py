"""Scenario bundles: loading manifests and running them round-robin."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import yaml

from ..dataplane import AccessRequest
from ..model import AgentId, Message
from ..runtime import AUTHORITY, PROHIBITED, Engine, TraceEvent
from ..slick import DEFAULT_BOUND, parse_fact, parse_policy, render
from .scripting import (
    ALL,
    AgentScript,
    AgreeOn,
    AllViewedExcept,
    Context,
    EnactUsing,
    Entry,
    ForgetIds,
    GossipTo,
    OnAgreed,
    OnAgreementChange,
    OnEnacted,
    OnHistory,
    OnStart,
    OnStated,
    OnTruths,
    OnViewed,
    RequestAccess,
    StateAndGossip,
    step_agent,
)

BUNDLED = Path(__file__).parent / "bundles"
DEFAULT_ROUND_CAP = 100


class ScenarioError(ValueError):
    pass


class NonTermination(RuntimeError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    title: str
    authority: AgentId
    agents: Tuple[AgentId, ...]
    statements: Dict[str, Message]
    scripts: Dict[AgentId, AgentScript]
    consortium: AgentScript
    disabled: Tuple[AgentId, ...] = ()
    expect: Dict[str, int] = field(default_factory=dict)


def bundled_names() -> List[str]:
    return sorted(p.name for p in BUNDLED.iterdir() if (p / "manifest.yaml").exists())


def resolve(name_or_path) -> Path:
    path = Path(name_or_path)
    if (path / "manifest.yaml").exists():
        return path
    if path.name == "manifest.yaml" and path.exists():
        return path.parent
    bundled = BUNDLED / str(name_or_path)
    if (bundled / "manifest.yaml").exists():
        return bundled
    raise ScenarioError(f"no scenario named {name_or_path!r} (bundled: {', '.join(bundled_names())})")


def _message_id(text: str) -> Tuple[AgentId, int]:
    author, _, seq = text.rpartition(" ")
    if not author or not seq.isdigit() or int(seq) < 1:
        raise ScenarioError(f"statement id {text!r} must read '<author> <positive number>'")
    return parse_fact(author), int(seq)


def _trigger(raw):
    if raw == "start":
        return OnStart()
    if raw == "agreement_change":
        return OnAgreementChange()
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ScenarioError(f"bad trigger {raw!r}")
    (kind, arg), = raw.items()
    if kind == "truths":
        return OnTruths(tuple(parse_fact(f) for f in arg))
    if kind == "agreed":
        return OnAgreed(tuple(arg))
    if kind == "history":
        return OnHistory(tuple(tuple(ids) for ids in arg))
    if kind == "enacted":
        return OnEnacted(str(arg))
    if kind == "stated":
        return OnStated(tuple(arg))
    if kind == "viewed":
        return OnViewed(tuple(arg))
    raise ScenarioError(f"unknown trigger {kind!r}")


def _recipients(raw):
    return ALL if raw in (None, ALL) else tuple(parse_fact(a) for a in raw)


def _reaction(raw: dict, agent: AgentId):
    qualify = lambda label: label if "/" in label else f"{render(agent)}/{label}"
    if "state" in raw:
        return StateAndGossip(raw["state"], _recipients(raw.get("to")))
    if "gossip" in raw:
        return GossipTo(tuple(raw["gossip"]), _recipients(raw.get("to")))
    if "enact" in raw:
        extra = raw.get("extra", {"all_viewed_except": []})
        if isinstance(extra, dict):
            extra = AllViewedExcept(tuple(extra.get("all_viewed_except", ())))
        else:
            extra = tuple(extra)
        return EnactUsing(qualify(raw["enact"]), raw.get("basis", "current"), extra)
    if "access" in raw:
        ops = tuple((verb, parse_fact(var)) for verb, var in raw["ops"])
        return RequestAccess(qualify(raw["access"]), ops)
    if "forget" in raw:
        return ForgetIds(tuple(raw["forget"]))
    if "agree" in raw:
        return AgreeOn(tuple(raw["agree"] or ()))
    raise ScenarioError(f"unknown reaction in {raw!r}")


def _script(agent: AgentId, entries: Iterable[dict], sequential=False) -> AgentScript:
    out = []
    for raw in entries or ():
        when = raw.get("when", [])
        out.append(Entry(tuple(_trigger(t) for t in when), _reaction(raw, agent)))
    return AgentScript(agent, tuple(out), sequential)


def load_scenario(name_or_path, disabled: Iterable[str] = ()) -> ScenarioSpec:
    root = resolve(name_or_path)
    with open(root / "manifest.yaml", encoding="utf-8") as fh:
        manifest = yaml.safe_load(fh)
    statements = {}
    for mid, rel in manifest["statements"].items():
        author, seq = _message_id(mid)
        text = (root / rel).read_text(encoding="utf-8")
        statements[mid] = Message(author, parse_policy(text), seq, text)
    authority = parse_fact(manifest.get("authority", AUTHORITY))
    agents = tuple(parse_fact(a) for a in manifest["agents"])
    scripts = {parse_fact(a): _script(parse_fact(a), entries) for a, entries in (manifest.get("scripts") or {}).items()}
    consortium = _script(authority, manifest.get("consortium"), sequential=True)
    off = tuple(parse_fact(a) for a in (*manifest.get("disabled", ()), *disabled))
    spec = ScenarioSpec(
        name=manifest.get("name", root.name),
        title=manifest.get("title", ""),
        authority=authority,
        agents=agents,
        statements=statements,
        scripts=scripts,
        consortium=consortium,
        disabled=off,
        expect=dict(manifest.get("expect") or {}),
    )
    _validate(spec)
    return spec


def _validate(spec: ScenarioSpec) -> None:
    labels = set()
    for script in [*spec.scripts.values(), spec.consortium]:
        for entry in script.reactions:
            if isinstance(entry.then, EnactUsing):
                labels.add(entry.then.label)
    for script in [*spec.scripts.values(), spec.consortium]:
        if script is not spec.consortium and script.agent not in spec.agents:
            raise ScenarioError(f"script for unknown agent {render(script.agent)}")
        for entry in script.reactions:
            r = entry.then
            ids = []
            if isinstance(r, StateAndGossip):
                ids = [r.statement]
                if spec.statements.get(r.statement) and spec.statements[r.statement].author != script.agent:
                    raise ScenarioError(f"{render(script.agent)} cannot state {r.statement}")
            elif isinstance(r, (GossipTo, ForgetIds, AgreeOn)):
                ids = list(r.ids)
            elif isinstance(r, EnactUsing):
                ids = ([] if r.basis == "current" else [r.basis]) + (
                    list(r.extras.ids) if isinstance(r.extras, AllViewedExcept) else list(r.extras))
            elif isinstance(r, RequestAccess) and r.action not in labels:
                raise ScenarioError(f"access refers to unknown enactment {r.action!r}")
            for trigger in entry.when:
                if isinstance(trigger, OnEnacted) and trigger.label not in labels:
                    raise ScenarioError(f"trigger refers to unknown enactment {trigger.label!r}")
            missing = [i for i in ids if i not in spec.statements]
            if missing:
                raise ScenarioError(f"unknown statement ids {missing}")


# --- scheduler -----------------------------------------------------------------

@dataclass
class RunResult:
    spec: ScenarioSpec
    engine: Engine
    rounds: int

    @property
    def events(self) -> List[TraceEvent]:
        return self.engine.events

    def summary(self) -> Dict[str, int]:
        control = [e for e in self.events if e.plane == "control" and e.outcome == "applied"]
        enacts = [e for e in control if e.is_applied_enact]
        data = [e for e in self.events if e.plane == "data-plane"]
        return {
            "statements": sum(1 for e in control if type(e.update).__name__ == "State"),
            "enactments": len(enacts),
            "permitted": sum(1 for e in enacts if e.permission.permitted),
            "grants": sum(1 for e in data if e.outcome == "granted"),
            "denials": sum(1 for e in data if e.outcome == "denied"),
            "rejections": sum(1 for e in self.events if e.outcome == "rejected"),
        }


def run_scenario(
    spec: ScenarioSpec,
    *,
    round_cap: int = DEFAULT_ROUND_CAP,
    strict: bool = False,
    bound: int = DEFAULT_BOUND,
) -> RunResult:
    """Round-robin: each enabled agent in manifest order, then the consortium program."""
    engine = Engine(authority=spec.authority, strict=strict, bound=bound)
    order = [a for a in spec.agents if a not in spec.disabled]
    turns = [(a, spec.scripts.get(a)) for a in order] + [(spec.authority, spec.consortium)]
    fired: Dict[AgentId, set] = {a: set() for a, _ in turns}
    last_seen: Dict[AgentId, tuple] = {}
    history: List[Tuple[str, ...]] = []
    enacted: Dict[str, int] = {}
    started = set()

    def context(agent: AgentId) -> Context:
        state = engine.state
        agreed = state.config.agreed
        changed = agent in last_seen and last_seen[agent] != agreed
        return Context(
            agent=agent,
            view=state.view(agent),
            agreed=agreed,
            history=tuple(history),
            stated_ids=frozenset(str(m.id) for m in state.config.stated),
            enacted=dict(enacted),
            assets=frozenset(engine.store.assets),
            statements=spec.statements,
            agents=tuple(order),
            first_turn=agent not in started,
            agreement_changed=changed,
        )

    for rounds in range(1, round_cap + 1):
        progressed = False
        for agent, script in turns:
            if script is None:
                continue
            ctx = context(agent)
            started.add(agent)
            last_seen[agent] = ctx.agreed
            intents, now = step_agent(script, ctx, frozenset(fired[agent]))
            fired[agent].update(now)
            progressed = progressed or bool(now)
            for intent in intents:
                if isinstance(intent, AccessRequest):
                    engine.access(intent)
                    continue
                event = engine.submit(intent)
                kind = type(intent).__name__
                if event.reason == PROHIBITED and intent.label:
                    # strict mode: the attempt was decided, so scripts waiting on it may proceed
                    enacted.setdefault(intent.label, event.index)
                if event.outcome != "applied":
                    continue
                if kind == "Agree":
                    history.append(tuple(str(m.id) for m in intent.messages))
                elif kind == "Enact" and intent.label:
                    enacted.setdefault(intent.label, event.index)
        if not progressed:
            pending = len(spec.consortium.reactions) - len(fired[spec.authority])
            if pending:
                raise NonTermination(f"{spec.name}: consortium program stalled with {pending} entries left")
            return RunResult(spec, engine, rounds)
    raise NonTermination(f"{spec.name}: still active after {round_cap} rounds")
