"""Shared asset store, mediated by enacted effects.

An access is granted only against an applied enactment whose recorded effect
list contains the matching ``agent reads/writes variable`` effect. Asset
contents are opaque bytes.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

from .model import AgentId, Effect
from .slick import Fact, render

READ, WRITE = "read", "write"
_VERB_OF = {READ: "reads", WRITE: "writes"}

NO_SUCH_ENACTMENT = "NoSuchEnactment"
EFFECT_NOT_OF_ACTION = "EffectNotOfAction"
NO_SUCH_ASSET = "NoSuchAsset"


@dataclass(frozen=True)
class Asset:
    content: bytes
    writer: AgentId
    index: int  # trace index of the granting access event


@dataclass(frozen=True)
class AccessRequest:
    agent: AgentId
    verb: str
    variable: Fact
    action_ref: int
    content: Optional[bytes] = None  # writes only

    def __post_init__(self):
        if self.verb not in _VERB_OF:
            raise ValueError(f"access verb must be read or write, not {self.verb!r}")

    @property
    def effect(self) -> Effect:
        return Effect(self.agent, _VERB_OF[self.verb], self.variable)


@dataclass(frozen=True)
class Granted:
    content: Optional[bytes] = None


@dataclass(frozen=True)
class Denied:
    reason: str


def placeholder(variable: Fact) -> bytes:
    return f"<asset {render(variable)}>".encode()


def digest(content: bytes) -> str:
    return hashlib.sha256(content).hexdigest()


class AssetStore:
    def __init__(self):
        self.assets: Dict[Fact, Asset] = {}

    def __contains__(self, variable: Fact) -> bool:
        return variable in self.assets

    def get(self, variable: Fact) -> Optional[Asset]:
        return self.assets.get(variable)

    def copy(self) -> "AssetStore":
        other = AssetStore()
        other.assets = dict(self.assets)
        return other


def request_access(store: AssetStore, events: Sequence, req: AccessRequest, index: int):
    """Decide ``req`` against the trace ``events``; a granted write mutates ``store``.

    ``index`` is the trace index the resulting access event will occupy.
    """
    ref = events[req.action_ref] if 0 <= req.action_ref < len(events) else None
    if ref is None or not ref.is_applied_enact:
        return Denied(NO_SUCH_ENACTMENT)
    if req.effect not in ref.effects:
        return Denied(EFFECT_NOT_OF_ACTION)
    if req.verb == READ:
        asset = store.get(req.variable)
        if asset is None:
            return Denied(NO_SUCH_ASSET)
        return Granted(asset.content)
    content = req.content if req.content is not None else placeholder(req.variable)
    store.assets[req.variable] = Asset(content, req.agent, index)
    return Granted(content)
