"""Combining verification, direct and recommended trust into one opinion.

Also hosts the two mutations that involve more than a single repository
event: cross-rating after a transaction and registration with re-birth
detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional

from .context import ANY_CONTEXT, ContextWeights, QueryContext
from .errors import (
    BelowVerificationFloor,
    InvalidConfig,
    NotAParty,
    SelfOpinion,
    ValueOutOfRange,
)
from .policy import (
    CredentialSet,
    TierPolicy,
    VerificationResult,
    validate_disclosure_request,
    verify_credentials,
)
from .repository import Repository, RepositoryState
from .reputation import TrustComponent, direct_trust, recommended_trust

WEIGHT_TOLERANCE = 1e-9
VERIFICATION = "V"
DIRECT = "D"
RECOMMENDED = "R"


@dataclass(frozen=True)
class IntegrationParams:
    alpha: float = 0.2  # verification
    beta: float = 0.3  # direct
    gamma: float = 0.5  # recommended
    min_verification: float = 0.2
    use_credibility: bool = True

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "min_verification"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InvalidConfig(f"integration {name} must be in [0, 1], got {value!r}")
        total = math.fsum((self.alpha, self.beta, self.gamma))
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidConfig(f"alpha + beta + gamma = {total!r}, expected 1.0")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "IntegrationParams":
        known = {"alpha", "beta", "gamma", "min_verification", "use_credibility"}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown integration keys: {sorted(unknown)}")
        kwargs: Dict[str, Any] = {}
        try:
            for key in ("alpha", "beta", "gamma", "min_verification"):
                if key in data:
                    kwargs[key] = float(data[key])
        except (TypeError, ValueError):
            raise InvalidConfig("integration parameters must be numeric") from None
        if "use_credibility" in data:
            if not isinstance(data["use_credibility"], bool):
                raise InvalidConfig("use_credibility must be true or false")
            kwargs["use_credibility"] = data["use_credibility"]
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "min_verification": self.min_verification,
            "use_credibility": self.use_credibility,
        }


@dataclass(frozen=True)
class TrustOpinion:
    score: float
    verification: float
    direct: TrustComponent
    recommended: TrustComponent
    components_used: FrozenSet[str] = field(default_factory=lambda: frozenset({VERIFICATION}))
    repo_version: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "score": self.score,
            "verification": self.verification,
            "direct": self.direct.to_dict(),
            "recommended": self.recommended.to_dict(),
            "components_used": sorted(self.components_used),
            "repo_version": self.repo_version,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrustOpinion":
        return cls(
            score=data["score"],
            verification=data["verification"],
            direct=TrustComponent.from_dict(data["direct"]),
            recommended=TrustComponent.from_dict(data["recommended"]),
            components_used=frozenset(data["components_used"]),
            repo_version=data["repo_version"],
        )


def combine(
    verification: float,
    direct: TrustComponent,
    recommended: TrustComponent,
    params: IntegrationParams,
) -> tuple:
    """Weighted mean over the components that are present.

    Returns ``(score, components_used)``. Absent components drop out and the
    remaining weights renormalise; with only verification present the score
    *is* the verification score, bit for bit.
    """
    used = {VERIFICATION}
    terms = [(params.alpha, verification)]
    if direct.present:
        used.add(DIRECT)
        terms.append((params.beta, direct.value))
    if recommended.present:
        used.add(RECOMMENDED)
        terms.append((params.gamma, recommended.value))
    if len(terms) == 1:
        return verification, frozenset(used)
    total = math.fsum(w for w, _ in terms)
    if total <= 0.0:
        # every present component carries zero weight
        return verification, frozenset(used)
    score = math.fsum(w * x for w, x in terms) / total
    values = [x for _, x in terms]
    score = min(max(values), max(min(values), score))
    return score, frozenset(used)


def trust_opinion(
    viewer: str,
    subject: str,
    query: Optional[QueryContext],
    repo: Any,
    params: IntegrationParams,
    weights: ContextWeights,
) -> TrustOpinion:
    """Fresh opinion of ``viewer`` about ``subject`` from one repository snapshot.

    Raises:
        UnknownPrincipal: either party is not registered.
        SelfOpinion: both ids resolve to the same identity record.
        BelowVerificationFloor: the subject's verification score is below
            ``params.min_verification``.
    """
    state: RepositoryState = repo if isinstance(repo, RepositoryState) else repo.state
    viewer_p = state.principal(viewer)
    subject_p = state.principal(subject)
    if viewer_p.record_id == subject_p.record_id:
        raise SelfOpinion(subject)
    verification = state.records[subject_p.record_id].verification
    if verification < params.min_verification:
        raise BelowVerificationFloor(subject, verification, params.min_verification)

    direct = direct_trust(viewer, subject, state)
    recommended = recommended_trust(
        viewer, subject, query or ANY_CONTEXT, state, weights, params.use_credibility
    )
    score, used = combine(verification, direct, recommended, params)
    return TrustOpinion(
        score=score,
        verification=verification,
        direct=direct,
        recommended=recommended,
        components_used=used,
        repo_version=state.version,
    )


def rate_after_transaction(
    rater: str,
    ratee: str,
    tx_id: str,
    value: float,
    repo: Repository,
    tick: Optional[int] = None,
) -> int:
    """Record a cross-rating between the two parties of ``tx_id``.

    Either party may rate the other; a later rating for the same ordered
    pair replaces the earlier one. Party membership is checked per identity
    record, so a re-registered principal can still rate on transactions made
    under its previous id.
    """
    state = repo.state
    tx = state.transaction(tx_id)
    state.principal(rater)
    state.principal(ratee)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not (0.0 <= value <= 1.0):
        raise ValueOutOfRange(value)
    party_records = {state.record_id(tx.buyer), state.record_id(tx.seller)}
    for who in (rater, ratee):
        if state.record_id(who) not in party_records:
            raise NotAParty(who, tx_id)
    return repo.upsert_rating(rater, ratee, float(value), tx_id, tick)


@dataclass(frozen=True)
class Registration:
    principal_id: str
    record_id: str
    verification: VerificationResult
    linked: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "principal_id": self.principal_id,
            "record_id": self.record_id,
            "verification": self.verification.score,
            "verified_attrs": list(self.verification.verified_attrs),
            "fingerprint": self.verification.fingerprint,
            "linked": self.linked,
        }


def next_principal_id(state: RepositoryState) -> str:
    n = len(state.principals) + 1
    while f"p{n}" in state.principals or f"p{n}" in state.records:
        n += 1
    return f"p{n}"


def register_with_rebirth_check(
    creds: CredentialSet,
    policy: TierPolicy,
    repo: Repository,
    principal_id: Optional[str] = None,
    requested: Optional[Iterable[str]] = None,
    tick: Optional[int] = None,
) -> Registration:
    """Register a principal, linking it to any record with the same fingerprint.

    ``requested`` is the attribute list the registration form asked for; it
    defaults to the disclosed attribute names. A fingerprint match joins the
    new id to the existing identity record, so every rating and transaction
    carries over.

    Raises:
        DisclosureViolation: the request includes attributes the tier does
            not require.
    """
    validate_disclosure_request(list(creds) if requested is None else requested, policy)
    result = verify_credentials(creds, policy)
    pid = principal_id or next_principal_id(repo.state)
    repo.register(pid, policy.tier, result.fingerprint, tick)
    repo.record_verification(pid, result.score, result.verified_attrs, tick)
    state = repo.state
    record_id = state.record_id(pid)
    return Registration(pid, record_id, result, linked=record_id != pid)
