"""Integrated policy and reputation trust engine."""

from .context import ContextWeights, QueryContext, context_weight, cost_norm, delivery_score, scope_match
from .engine import AtcCache, EngineParams, TrustEngine, atc_opinion, dtc_opinion
from .errors import (
    BelowVerificationFloor,
    CorruptLog,
    DisclosureViolation,
    InvalidConfig,
    InvariantViolation,
    NotAParty,
    SelfOpinion,
    TrustError,
    UnknownPrincipal,
    UnknownTransaction,
    ValueOutOfRange,
)
from .integrator import (
    IntegrationParams,
    Registration,
    TrustOpinion,
    combine,
    rate_after_transaction,
    register_with_rebirth_check,
    trust_opinion,
)
from .policy import (
    Credential,
    TierPolicy,
    VerificationResult,
    identity_fingerprint,
    validate_disclosure_request,
    verify_credentials,
)
from .repository import Event, Rating, Repository, RepositoryState, TransactionRecord, replay
from .reputation import TrustComponent, direct_trust, rater_credibility, recommended_trust

__version__ = "0.1.0"

__all__ = [
    "AtcCache",
    "BelowVerificationFloor",
    "ContextWeights",
    "CorruptLog",
    "Credential",
    "DisclosureViolation",
    "EngineParams",
    "Event",
    "IntegrationParams",
    "InvalidConfig",
    "InvariantViolation",
    "NotAParty",
    "QueryContext",
    "Rating",
    "Registration",
    "Repository",
    "RepositoryState",
    "SelfOpinion",
    "TierPolicy",
    "TransactionRecord",
    "TrustComponent",
    "TrustEngine",
    "TrustError",
    "TrustOpinion",
    "UnknownPrincipal",
    "UnknownTransaction",
    "ValueOutOfRange",
    "VerificationResult",
    "atc_opinion",
    "combine",
    "context_weight",
    "cost_norm",
    "delivery_score",
    "direct_trust",
    "dtc_opinion",
    "identity_fingerprint",
    "rate_after_transaction",
    "rater_credibility",
    "recommended_trust",
    "register_with_rebirth_check",
    "replay",
    "scope_match",
    "trust_opinion",
    "validate_disclosure_request",
    "verify_credentials",
]
