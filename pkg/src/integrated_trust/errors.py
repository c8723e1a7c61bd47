"""Exception hierarchy shared by every layer of the trust engine."""

from __future__ import annotations

from typing import Any, Dict, Iterable, List, Optional


class TrustError(Exception):
    """Base class for domain errors.

    The class name doubles as the machine-readable error code emitted by the
    command line tool, so subclasses should not be renamed casually.
    """

    def __init__(self, message: str = "", **details: Any) -> None:
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details = details

    @property
    def code(self) -> str:
        return self.__class__.__name__

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"error": self.code, "message": self.message}
        if self.details:
            out["details"] = self.details
        return out


class UnknownPrincipal(TrustError):
    def __init__(self, principal_id: str) -> None:
        super().__init__(f"unknown principal {principal_id!r}", principal=principal_id)
        self.principal_id = principal_id


class UnknownTransaction(TrustError):
    def __init__(self, tx_id: str) -> None:
        super().__init__(f"unknown transaction {tx_id!r}", tx_id=tx_id)
        self.tx_id = tx_id


class InvariantViolation(TrustError):
    """An event or record broke a named invariant (``rule``)."""

    def __init__(self, rule: str, message: str = "") -> None:
        super().__init__(message or f"invariant violated: {rule}", rule=rule)
        self.rule = rule


class CorruptLog(TrustError):
    """Replay hit a sequence gap or an invalid event; ``seq`` is the first bad one."""

    def __init__(self, seq: int, reason: str) -> None:
        super().__init__(f"corrupt log at seq {seq}: {reason}", seq=seq, reason=reason)
        self.seq = seq
        self.reason = reason


class DisclosureViolation(TrustError):
    """A registration asked for attributes the tier does not require."""

    def __init__(self, extra: Iterable[str], tier: Optional[str] = None) -> None:
        self.extra: List[str] = list(extra)
        super().__init__(
            f"attributes not required by tier {tier!r}: {', '.join(self.extra)}",
            extra=self.extra,
            tier=tier,
        )


class NotAParty(TrustError):
    def __init__(self, principal_id: str, tx_id: str) -> None:
        super().__init__(
            f"{principal_id!r} is not a party to transaction {tx_id!r}",
            principal=principal_id,
            tx_id=tx_id,
        )


class ValueOutOfRange(TrustError):
    def __init__(self, value: Any) -> None:
        super().__init__(f"rating value {value!r} outside [0, 1]", value=repr(value))


class SelfOpinion(TrustError):
    def __init__(self, principal_id: str) -> None:
        super().__init__(
            f"viewer and subject are the same identity ({principal_id!r})",
            principal=principal_id,
        )


class BelowVerificationFloor(TrustError):
    def __init__(self, principal_id: str, score: float, floor: float) -> None:
        super().__init__(
            f"{principal_id!r} has verification {score!r} below the floor {floor!r}",
            principal=principal_id,
            score=score,
            floor=floor,
        )
        self.floor = floor


class InvalidConfig(TrustError):
    """Configuration failed validation. Reported as a usage error by the CLI."""
