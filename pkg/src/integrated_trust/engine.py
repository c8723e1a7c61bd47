"""Opinion computation modes.

DTC recomputes every opinion from the current repository snapshot. ATC
serves a cached opinion as long as the repository has advanced by no more
than ``staleness_events`` events since it was computed; with the default
staleness of 0 the two modes are indistinguishable.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from .context import ANY_CONTEXT, ContextWeights, QueryContext
from .errors import InvalidConfig
from .integrator import IntegrationParams, TrustOpinion, trust_opinion
from .policy import TierPolicy
from .repository import Repository, RepositoryState, canonical_json


@dataclass(frozen=True)
class EngineParams:
    integration: IntegrationParams = field(default_factory=IntegrationParams)
    context: ContextWeights = field(default_factory=ContextWeights)
    staleness_events: int = 0
    tiers: Mapping[str, TierPolicy] = field(default_factory=dict)

    def __post_init__(self) -> None:
        s = self.staleness_events
        if isinstance(s, bool) or not isinstance(s, int) or s < 0:
            raise InvalidConfig(f"staleness_events must be a non-negative integer, got {s!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "integration": self.integration.to_dict(),
            "context": self.context.to_dict(),
            "cache": {"staleness_events": self.staleness_events},
            "tiers": {name: policy.to_dict() for name, policy in sorted(self.tiers.items())},
        }

    def digest(self) -> str:
        """Hash of everything that can change an opinion value.

        Staleness is left out: it decides *when* to recompute, not *what*.
        """
        data = self.to_dict()
        del data["cache"]
        return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


CacheKey = Tuple[str, str, Optional[str], str]


@dataclass(frozen=True)
class CacheEntry:
    opinion: TrustOpinion
    version: int
    tick: int


class AtcCache:
    """Opinion cache keyed by ``(viewer, subject, query scope, params digest)``.

    Each entry remembers the repository version it was computed at. An entry
    is served while ``current_version - entry.version <= staleness_events``.
    """

    def __init__(self, staleness_events: int = 0) -> None:
        if staleness_events < 0:
            raise InvalidConfig("staleness_events must be >= 0")
        self.staleness_events = staleness_events
        self._entries: Dict[CacheKey, CacheEntry] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._entries)

    def flush(self) -> None:
        with self._lock:
            self._entries.clear()

    def lookup(self, key: CacheKey, version: int) -> Optional[TrustOpinion]:
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None and 0 <= version - entry.version <= self.staleness_events:
                self.hits += 1
                return entry.opinion
            self.misses += 1
            return None

    def store(self, key: CacheKey, opinion: TrustOpinion, version: int, tick: int) -> None:
        with self._lock:
            current = self._entries.get(key)
            # concurrent fills: never replace a newer computation with an older one
            if current is None or current.version <= version:
                self._entries[key] = CacheEntry(opinion, version, tick)

    def to_dict(self) -> Dict[str, Any]:
        with self._lock:
            entries = [
                {
                    "viewer": k[0],
                    "subject": k[1],
                    "scope": k[2],
                    "params": k[3],
                    "version": e.version,
                    "tick": e.tick,
                    "opinion": e.opinion.to_dict(),
                }
                for k, e in sorted(self._entries.items(), key=lambda kv: tuple(map(str, kv[0])))
            ]
        return {"staleness_events": self.staleness_events, "entries": entries}

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(canonical_json(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path], staleness_events: int) -> "AtcCache":
        """Load persisted entries; the configured staleness wins over the file's."""
        cache = cls(staleness_events)
        p = Path(path)
        if not p.exists():
            return cache
        data = json.loads(p.read_text(encoding="utf-8"))
        for item in data.get("entries", []):
            key = (item["viewer"], item["subject"], item["scope"], item["params"])
            cache._entries[key] = CacheEntry(
                TrustOpinion.from_dict(item["opinion"]), item["version"], item["tick"]
            )
        return cache


def _state(repo: Any) -> RepositoryState:
    return repo if isinstance(repo, RepositoryState) else repo.state


def dtc_opinion(
    viewer: str,
    subject: str,
    query: Optional[QueryContext],
    repo: Any,
    params: EngineParams,
) -> TrustOpinion:
    """Recompute from current state; never touches a cache."""
    return trust_opinion(
        viewer, subject, query or ANY_CONTEXT, _state(repo), params.integration, params.context
    )


def atc_opinion(
    viewer: str,
    subject: str,
    query: Optional[QueryContext],
    repo: Any,
    cache: AtcCache,
    params: EngineParams,
) -> TrustOpinion:
    """Serve from ``cache`` when fresh enough, else compute via DTC and store.

    Principal existence is always checked against the live snapshot so an
    unknown id fails the same way in both modes.
    """
    state = _state(repo)
    state.principal(viewer)
    state.principal(subject)
    query = query or ANY_CONTEXT
    key: CacheKey = (viewer, subject, query.scope, params.digest())
    cached = cache.lookup(key, state.version)
    if cached is not None:
        return cached
    opinion = dtc_opinion(viewer, subject, query, state, params)
    cache.store(key, opinion, state.version, state.tick)
    return opinion


class TrustEngine:
    """Convenience facade binding one repository, parameter set and cache."""

    def __init__(
        self,
        repo: Optional[Repository] = None,
        params: Optional[EngineParams] = None,
        cache: Optional[AtcCache] = None,
    ) -> None:
        self.repo = repo if repo is not None else Repository()
        self.params = params if params is not None else EngineParams()
        self.cache = cache if cache is not None else AtcCache(self.params.staleness_events)

    def opinion(
        self, viewer: str, subject: str, scope: Optional[str] = None, mode: str = "dtc"
    ) -> TrustOpinion:
        query = QueryContext(scope)
        if mode == "dtc":
            return dtc_opinion(viewer, subject, query, self.repo, self.params)
        if mode == "atc":
            return atc_opinion(viewer, subject, query, self.repo, self.cache, self.params)
        raise ValueError(f"mode must be 'atc' or 'dtc', got {mode!r}")

    def with_params(self, **changes: Any) -> "TrustEngine":
        params = replace(self.params, **changes)
        return TrustEngine(self.repo, params, AtcCache(params.staleness_events))
