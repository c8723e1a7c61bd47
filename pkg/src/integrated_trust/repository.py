"""Event-sourced data repository.

All state is derived from an append-only log of four event kinds.
Registrations that share an identity fingerprint are folded into a single
*identity record*, and ratings are stored per ordered pair of records, so at
most one (the latest) rating exists between two parties and a re-registered
principal inherits the history of its predecessor.

State objects are published copy-on-write: the single writer builds a new
:class:`RepositoryState` for every event and swaps it in, so a reader that
grabbed ``repo.state`` keeps a consistent snapshot for as long as it likes.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from .errors import (
    CorruptLog,
    InvariantViolation,
    TrustError,
    UnknownPrincipal,
    UnknownTransaction,
)

REGISTERED = "Registered"
CREDENTIAL_VERIFIED = "CredentialVerified"
TRANSACTION_COMPLETED = "TransactionCompleted"
RATING_UPSERTED = "RatingUpserted"
EVENT_KINDS = (REGISTERED, CREDENTIAL_VERIFIED, TRANSACTION_COMPLETED, RATING_UPSERTED)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    tick: int
    payload: Mapping[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {"seq": self.seq, "kind": self.kind, "tick": self.tick, "payload": dict(self.payload)}

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Event":
        return cls(
            seq=data["seq"],
            kind=data["kind"],
            tick=data["tick"],
            payload=dict(data["payload"]),
        )


@dataclass(frozen=True)
class Principal:
    principal_id: str
    tier: str
    record_id: str
    fingerprint: Optional[str]
    tick: int


@dataclass(frozen=True)
class IdentityRecord:
    """Reputation record shared by every principal with the same fingerprint.

    ``record_id`` is the id of the first principal that created it.
    """

    record_id: str
    members: Tuple[str, ...]
    fingerprint: Optional[str] = None
    verification: float = 0.0
    verified_attrs: Tuple[str, ...] = ()


@dataclass(frozen=True)
class TransactionRecord:
    tx_id: str
    buyer: str
    seller: str
    cost: Decimal
    scope: str
    promised_days: int
    actual_days: int
    tick: int

    def parties(self) -> Tuple[str, str]:
        return (self.buyer, self.seller)


@dataclass(frozen=True)
class Rating:
    rater: str
    ratee: str
    value: float
    tx_id: str
    tick: int


@dataclass(frozen=True)
class RepositoryState:
    """Immutable snapshot of derived state.

    The dict fields are never mutated after publication; treat them as
    read-only. ``ratings`` is indexed ``ratee record -> rater record -> Rating``.
    """

    version: int = 0
    tick: int = 0
    principals: Dict[str, Principal] = field(default_factory=dict)
    records: Dict[str, IdentityRecord] = field(default_factory=dict)
    fingerprints: Dict[str, str] = field(default_factory=dict)
    transactions: Dict[str, TransactionRecord] = field(default_factory=dict)
    ratings: Dict[str, Dict[str, Rating]] = field(default_factory=dict)

    # queries

    def has_principal(self, principal_id: str) -> bool:
        return principal_id in self.principals

    def principal(self, principal_id: str) -> Principal:
        try:
            return self.principals[principal_id]
        except KeyError:
            raise UnknownPrincipal(principal_id) from None

    def record_id(self, principal_id: str) -> str:
        return self.principal(principal_id).record_id

    def record(self, principal_id: str) -> IdentityRecord:
        return self.records[self.record_id(principal_id)]

    def verification(self, principal_id: str) -> float:
        return self.record(principal_id).verification

    def same_identity(self, a: str, b: str) -> bool:
        return self.record_id(a) == self.record_id(b)

    def transaction(self, tx_id: str) -> TransactionRecord:
        try:
            return self.transactions[tx_id]
        except KeyError:
            raise UnknownTransaction(tx_id) from None

    def latest_rating(self, rater: str, ratee: str) -> Optional[Rating]:
        """The single stored rating from ``rater`` about ``ratee``, if any."""
        if rater not in self.principals or ratee not in self.principals:
            return None
        by_rater = self.ratings.get(self.principals[ratee].record_id)
        if not by_rater:
            return None
        return by_rater.get(self.principals[rater].record_id)

    def ratings_about(self, ratee: str) -> List[Rating]:
        """Latest ratings about ``ratee``, ordered by ascending rater record id."""
        if ratee not in self.principals:
            return []
        by_rater = self.ratings.get(self.principals[ratee].record_id, {})
        return [by_rater[rid] for rid in sorted(by_rater)]

    def rated_by(self, ratee: str) -> List[Tuple[str, Rating]]:
        """``(rater record id, rating)`` pairs about ``ratee`` in ascending order."""
        if ratee not in self.principals:
            return []
        by_rater = self.ratings.get(self.principals[ratee].record_id, {})
        return [(rid, by_rater[rid]) for rid in sorted(by_rater)]

    def rating_count(self, rater: str, ratee: str) -> int:
        return 0 if self.latest_rating(rater, ratee) is None else 1

    def total_ratings(self) -> int:
        return sum(len(v) for v in self.ratings.values())

    # serialization

    def export(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "tick": self.tick,
            "principals": {
                pid: {
                    "tier": p.tier,
                    "record": p.record_id,
                    "fingerprint": p.fingerprint,
                    "tick": p.tick,
                }
                for pid, p in self.principals.items()
            },
            "records": {
                rid: {
                    "members": list(r.members),
                    "fingerprint": r.fingerprint,
                    "verification": r.verification,
                    "verified_attrs": list(r.verified_attrs),
                }
                for rid, r in self.records.items()
            },
            "transactions": {
                tid: {
                    "buyer": t.buyer,
                    "seller": t.seller,
                    "cost": str(t.cost),
                    "scope": t.scope,
                    "promised_days": t.promised_days,
                    "actual_days": t.actual_days,
                    "tick": t.tick,
                }
                for tid, t in self.transactions.items()
            },
            "ratings": {
                ratee: {
                    rater: {
                        "rater": r.rater,
                        "ratee": r.ratee,
                        "value": r.value,
                        "tx_id": r.tx_id,
                        "tick": r.tick,
                    }
                    for rater, r in by_rater.items()
                }
                for ratee, by_rater in self.ratings.items()
            },
        }

    def to_json(self) -> str:
        """Canonical (sorted-key, compact) JSON; equal states give equal bytes."""
        return canonical_json(self.export())


EMPTY_STATE = RepositoryState()


def _require(payload: Mapping[str, Any], key: str) -> Any:
    try:
        return payload[key]
    except KeyError:
        raise InvariantViolation("payload complete", f"payload missing field {key!r}") from None


def _require_str(payload: Mapping[str, Any], key: str) -> str:
    value = _require(payload, key)
    if not isinstance(value, str) or not value:
        raise InvariantViolation(f"{key} non-empty string")
    return value


def _require_int(payload: Mapping[str, Any], key: str) -> int:
    value = _require(payload, key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvariantViolation(f"{key} integer")
    return value


def _unit_interval(value: Any, rule: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvariantViolation(rule)
    value = float(value)
    if math.isnan(value) or not (0.0 <= value <= 1.0):
        raise InvariantViolation(rule)
    return value


def _apply_registered(state: RepositoryState, event: Event) -> RepositoryState:
    p = event.payload
    pid = _require_str(p, "principal")
    tier = _require_str(p, "tier")
    fingerprint = p.get("fingerprint")
    if fingerprint is not None and (not isinstance(fingerprint, str) or not fingerprint):
        raise InvariantViolation("fingerprint is a hex string or null")
    if pid in state.principals:
        raise InvariantViolation("principal id unique", f"principal {pid!r} already registered")

    records = dict(state.records)
    fingerprints = state.fingerprints
    if fingerprint is not None and fingerprint in state.fingerprints:
        record_id = state.fingerprints[fingerprint]
        old = records[record_id]
        records[record_id] = replace(old, members=old.members + (pid,))
    else:
        record_id = pid
        if record_id in records:
            raise InvariantViolation("principal id unique", f"record {pid!r} already exists")
        records[record_id] = IdentityRecord(record_id=record_id, members=(pid,), fingerprint=fingerprint)
        if fingerprint is not None:
            fingerprints = dict(fingerprints)
            fingerprints[fingerprint] = record_id

    principals = dict(state.principals)
    principals[pid] = Principal(pid, tier, record_id, fingerprint, event.tick)
    return replace(state, principals=principals, records=records, fingerprints=fingerprints)


def _apply_credential_verified(state: RepositoryState, event: Event) -> RepositoryState:
    p = event.payload
    pid = _require_str(p, "principal")
    score = _unit_interval(_require(p, "score"), "verification score in [0,1]")
    attrs = _require(p, "verified_attrs")
    if isinstance(attrs, str) or not isinstance(attrs, (list, tuple)):
        raise InvariantViolation("verified_attrs is a list")
    record_id = state.record_id(pid)
    records = dict(state.records)
    records[record_id] = replace(
        records[record_id], verification=score, verified_attrs=tuple(sorted(map(str, attrs)))
    )
    return replace(state, records=records)


def _apply_transaction(state: RepositoryState, event: Event) -> RepositoryState:
    p = event.payload
    tx_id = _require_str(p, "tx_id")
    buyer = _require_str(p, "buyer")
    seller = _require_str(p, "seller")
    scope = _require(p, "scope")
    if not isinstance(scope, str):
        raise InvariantViolation("scope is a string")
    raw_cost = _require(p, "cost")
    if not isinstance(raw_cost, str):
        raise InvariantViolation("cost serialized as decimal string")
    try:
        cost = Decimal(raw_cost)
    except InvalidOperation:
        raise InvariantViolation("cost is a decimal") from None
    if not cost.is_finite() or cost < 0:
        raise InvariantViolation("cost >= 0")
    promised = _require_int(p, "promised_days")
    actual = _require_int(p, "actual_days")
    if promised < 1:
        raise InvariantViolation("promised_days >= 1")
    if actual < 0:
        raise InvariantViolation("actual_days >= 0")
    if tx_id in state.transactions:
        raise InvariantViolation("transactions are never overwritten", f"duplicate tx {tx_id!r}")
    state.principal(buyer)
    state.principal(seller)
    if state.same_identity(buyer, seller):
        raise InvariantViolation("buyer != seller")

    transactions = dict(state.transactions)
    transactions[tx_id] = TransactionRecord(
        tx_id, buyer, seller, cost, scope, promised, actual, event.tick
    )
    return replace(state, transactions=transactions)


def _apply_rating(state: RepositoryState, event: Event) -> RepositoryState:
    p = event.payload
    rater = _require_str(p, "rater")
    ratee = _require_str(p, "ratee")
    tx_id = _require_str(p, "tx_id")
    if rater == ratee:
        raise InvariantViolation("rater != ratee")
    value = _unit_interval(_require(p, "value"), "rating value in [0,1]")
    rater_record = state.record_id(rater)
    ratee_record = state.record_id(ratee)
    if rater_record == ratee_record:
        raise InvariantViolation("rater != ratee", "rater and ratee share one identity record")
    state.transaction(tx_id)

    ratings = dict(state.ratings)
    by_rater = dict(ratings.get(ratee_record, {}))
    by_rater[rater_record] = Rating(rater, ratee, value, tx_id, event.tick)
    ratings[ratee_record] = by_rater
    return replace(state, ratings=ratings)


_APPLY = {
    REGISTERED: _apply_registered,
    CREDENTIAL_VERIFIED: _apply_credential_verified,
    TRANSACTION_COMPLETED: _apply_transaction,
    RATING_UPSERTED: _apply_rating,
}


def apply_event(state: RepositoryState, event: Event) -> RepositoryState:
    """Return the state after ``event``; ``state`` itself is left untouched."""
    if event.seq != state.version + 1:
        raise InvariantViolation(
            "seq contiguous", f"expected seq {state.version + 1}, got {event.seq}"
        )
    if event.kind not in _APPLY:
        raise InvariantViolation("known event kind", f"unknown event kind {event.kind!r}")
    if isinstance(event.tick, bool) or not isinstance(event.tick, int) or event.tick < 0:
        raise InvariantViolation("tick is a non-negative integer")
    new = _APPLY[event.kind](state, event)
    return replace(new, version=event.seq, tick=max(state.tick, event.tick))


def replay(events: Iterable[Union[Event, Mapping[str, Any]]]) -> RepositoryState:
    """Rebuild derived state from a log.

    Raises:
        CorruptLog: on a sequence gap or an event that fails validation,
            carrying the seq of the first offending event.
    """
    state = EMPTY_STATE
    for position, raw in enumerate(events, start=1):
        try:
            event = raw if isinstance(raw, Event) else Event.from_dict(raw)
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptLog(position, f"malformed event: {exc}") from None
        if event.seq != position:
            raise CorruptLog(event.seq, f"expected seq {position}")
        try:
            state = apply_event(state, event)
        except TrustError as exc:
            raise CorruptLog(event.seq, f"{exc.code}: {exc.message}") from None
    return state


def read_log(path: Union[str, Path]) -> List[Event]:
    events: List[Event] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                events.append(Event.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorruptLog(lineno, f"unparseable line: {exc}") from None
    return events


class Repository:
    """Single-writer event store with an optional JSON-lines log on disk.

    Mutations are serialized through an internal lock. Reads go through
    :attr:`state`, an immutable snapshot, and never block the writer.
    """

    def __init__(self, log_path: Optional[Union[str, Path]] = None, *, fsync: bool = True) -> None:
        self._state = EMPTY_STATE
        self._events: List[Event] = []
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path is not None else None
        self._fsync = fsync

    @classmethod
    def open(cls, log_path: Union[str, Path], *, fsync: bool = True) -> "Repository":
        """Load an existing log (or start an empty one) and keep appending to it."""
        repo = cls(log_path, fsync=fsync)
        path = Path(log_path)
        if path.exists():
            events = read_log(path)
            repo._state = replay(events)
            repo._events = events
        return repo

    @classmethod
    def from_events(cls, events: Iterable[Union[Event, Mapping[str, Any]]]) -> "Repository":
        repo = cls()
        evs = [e if isinstance(e, Event) else Event.from_dict(e) for e in events]
        repo._state = replay(evs)
        repo._events = evs
        return repo

    @property
    def state(self) -> RepositoryState:
        return self._state

    def snapshot(self) -> RepositoryState:
        return self._state

    @property
    def version(self) -> int:
        return self._state.version

    @property
    def events(self) -> Tuple[Event, ...]:
        return tuple(self._events)

    @property
    def log_path(self) -> Optional[Path]:
        return self._log_path

    def append_event(self, event: Event) -> int:
        """Validate and apply ``event``; return the new version.

        A rejected event leaves state, version and log untouched.
        """
        with self._lock:
            new_state = apply_event(self._state, event)
            if self._log_path is not None:
                with open(self._log_path, "a", encoding="utf-8") as fh:
                    fh.write(event.to_json() + "\n")
                    fh.flush()
                    if self._fsync:
                        os.fsync(fh.fileno())
            self._events.append(event)
            self._state = new_state
            return new_state.version

    def append(self, kind: str, payload: Mapping[str, Any], tick: Optional[int] = None) -> int:
        """Append with the next sequence number; ``tick`` defaults to the last tick seen."""
        with self._lock:
            seq = self._state.version + 1
            t = self._state.tick if tick is None else tick
        return self.append_event(Event(seq, kind, t, dict(payload)))

    # typed helpers over append()

    def register(
        self, principal_id: str, tier: str, fingerprint: Optional[str] = None, tick: Optional[int] = None
    ) -> int:
        return self.append(
            REGISTERED, {"principal": principal_id, "tier": tier, "fingerprint": fingerprint}, tick
        )

    def record_verification(
        self, principal_id: str, score: float, verified_attrs: Iterable[str], tick: Optional[int] = None
    ) -> int:
        return self.append(
            CREDENTIAL_VERIFIED,
            {"principal": principal_id, "score": score, "verified_attrs": sorted(verified_attrs)},
            tick,
        )

    def add_transaction(
        self,
        tx_id: str,
        buyer: str,
        seller: str,
        cost: Union[Decimal, int, str],
        scope: str,
        promised_days: int,
        actual_days: int,
        tick: Optional[int] = None,
    ) -> int:
        if isinstance(cost, float):
            raise TypeError("pass cost as Decimal, int or str to avoid float drift")
        return self.append(
            TRANSACTION_COMPLETED,
            {
                "tx_id": tx_id,
                "buyer": buyer,
                "seller": seller,
                "cost": str(cost),
                "scope": scope,
                "promised_days": promised_days,
                "actual_days": actual_days,
            },
            tick,
        )

    def upsert_rating(
        self, rater: str, ratee: str, value: float, tx_id: str, tick: Optional[int] = None
    ) -> int:
        return self.append(
            RATING_UPSERTED, {"rater": rater, "ratee": ratee, "value": value, "tx_id": tx_id}, tick
        )

    # read delegation

    def latest_rating(self, rater: str, ratee: str) -> Optional[Rating]:
        return self._state.latest_rating(rater, ratee)

    def ratings_about(self, ratee: str) -> List[Rating]:
        return self._state.ratings_about(ratee)

    def principal(self, principal_id: str) -> Principal:
        return self._state.principal(principal_id)

    def transaction(self, tx_id: str) -> TransactionRecord:
        return self._state.transaction(tx_id)

    def export_state(self) -> str:
        return self._state.to_json()

    def export_log(self) -> str:
        return "".join(e.to_json() + "\n" for e in self._events)

    def write_log(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.export_log(), encoding="utf-8")
