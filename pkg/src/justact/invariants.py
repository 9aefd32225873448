"""Framework theorems as checks over a recorded trace.

Each check replays the trace and returns human-readable violations; an empty
list means the property held at every step.
"""
from __future__ import annotations

from typing import List, Sequence

from .model import dec_permitted, enum_effects_of
from .runtime import Forget, SystemState, TraceEvent, snapshots


def _states(events: Sequence[TraceEvent], **options) -> List[SystemState]:
    return [state for _, state in snapshots(events, **options)]


def growing(events, **options) -> List[str]:
    bad = []
    prev = None
    for event, state in snapshots(events, **options):
        cfg = state.config
        if prev is not None:
            if not prev.stated <= cfg.stated:
                bad.append(f"[{event.index}] stated shrank")
            if cfg.enacted[: len(prev.enacted)] != prev.enacted:
                bad.append(f"[{event.index}] enacted shrank")
        prev = cfg
    return bad


def accuracy(events, **options) -> List[str]:
    return [f"[{e.index}] inaccurate views" for e, s in snapshots(events, **options)
            if e.outcome == "applied" and not s.accurate()]


def enacted_sourced(events) -> List[str]:
    return [f"[{e.index}] enacted but unsourced" for e in events
            if e.is_applied_enact and not e.permission.sourced]


def prospection(events, **options) -> List[str]:
    """Permitted at i and basis still agreed at j > i implies permitted at j."""
    states = _states(events, **options)
    bad = []
    for e in events:
        if not (e.is_applied_enact and e.permission.permitted):
            continue
        action = e.update.action
        for j in range(e.index + 1, len(states)):
            cfg = states[j].config
            if action.basis in cfg.agreed and not dec_permitted(cfg, action).permitted:
                bad.append(f"[{e.index}] permitted action no longer permitted at {j}")
    return bad


def sourced_preserved(events, **options) -> List[str]:
    states = _states(events, **options)
    bad = []
    for e in events:
        if not e.is_applied_enact:
            continue
        action = e.update.action
        for j in range(e.index, len(states)):
            if not dec_permitted(states[j].config, action).sourced:
                bad.append(f"[{e.index}] sourced action unsourced at {j}")
    return bad


def effects_preserved(events, **options) -> List[str]:
    """The recorded effects of each enactment are recomputable from every later snapshot."""
    states = _states(events, **options)
    bad = []
    for e in events:
        if not e.is_applied_enact:
            continue
        action = e.update.action
        for j in range(e.index, len(states)):
            if action not in states[j].config.enacted:
                bad.append(f"[{e.index}] action missing from snapshot {j}")
            elif tuple(enum_effects_of(action)) != e.effects:
                bad.append(f"[{e.index}] effects differ at {j}")
    return bad


def forget_keeps_statedness(events, **options) -> List[str]:
    bad = []
    prev = None
    for event, state in snapshots(events, **options):
        if isinstance(event.update, Forget) and event.outcome == "applied":
            if prev is not None and prev.stated != state.config.stated:
                bad.append(f"[{event.index}] forget changed statedness")
        prev = state.config
    return bad


CHECKS = {
    "growing": growing,
    "accuracy": accuracy,
    "enacted-sourced": lambda events, **o: enacted_sourced(events),
    "prospection": prospection,
    "sourced-preserved": sourced_preserved,
    "effects-preserved": effects_preserved,
    "forget-keeps-statedness": forget_keeps_statedness,
}


def check_all(events, **options) -> dict:
    return {name: check(events, **options) for name, check in CHECKS.items()}
