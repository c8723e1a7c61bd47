"""Credential policy layer.

Registration under a tier may only ask for the attributes that tier needs,
and verified credentials yield a graded score in ``[0, 1]`` rather than an
allow/deny bit. A SHA-256 fingerprint over the tier's strong attributes lets
the repository recognise the same real identity registering again.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .errors import DisclosureViolation, InvalidConfig

WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Credential:
    value: str
    verified: bool = False


CredentialSet = Mapping[str, Credential]


@dataclass(frozen=True)
class TierPolicy:
    """Attributes a service tier needs, with their verification weights.

    Attributes:
        tier: Tier name.
        required_attrs: ``(name, weight)`` pairs. Weights lie in ``(0, 1]``
            and sum to 1.
        strong_attrs: Names hashed into the identity fingerprint. Must be a
            subset of the required names.
    """

    tier: str
    required_attrs: Tuple[Tuple[str, float], ...]
    strong_attrs: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        names = [name for name, _ in self.required_attrs]
        if not self.tier:
            raise InvalidConfig("tier name must be non-empty")
        if len(set(names)) != len(names):
            raise InvalidConfig(f"tier {self.tier!r}: duplicate attribute names")
        for name, weight in self.required_attrs:
            if not (0.0 < weight <= 1.0) or math.isnan(weight):
                raise InvalidConfig(
                    f"tier {self.tier!r}: weight of {name!r} must be in (0, 1], got {weight!r}"
                )
        total = math.fsum(w for _, w in self.required_attrs)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidConfig(f"tier {self.tier!r}: weights sum to {total!r}, expected 1.0")
        missing = set(self.strong_attrs) - set(names)
        if missing:
            raise InvalidConfig(
                f"tier {self.tier!r}: strong attributes not required: {sorted(missing)}"
            )

    @property
    def required_names(self) -> List[str]:
        return [name for name, _ in self.required_attrs]

    @property
    def weights(self) -> Dict[str, float]:
        return dict(self.required_attrs)

    @classmethod
    def from_dict(cls, tier: str, data: Mapping[str, Any]) -> "TierPolicy":
        try:
            required = data["required"]
        except (KeyError, TypeError):
            raise InvalidConfig(f"tier {tier!r}: missing 'required' mapping") from None
        if not isinstance(required, Mapping):
            raise InvalidConfig(f"tier {tier!r}: 'required' must map attribute -> weight")
        try:
            pairs = tuple((str(k), float(v)) for k, v in required.items())
        except (TypeError, ValueError):
            raise InvalidConfig(f"tier {tier!r}: weights must be numbers") from None
        strong = data.get("strong", [])
        if isinstance(strong, str) or not isinstance(strong, Iterable):
            raise InvalidConfig(f"tier {tier!r}: 'strong' must be a list of names")
        return cls(tier=tier, required_attrs=pairs, strong_attrs=frozenset(map(str, strong)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "required": {name: weight for name, weight in self.required_attrs},
            "strong": sorted(self.strong_attrs),
        }

    def digest(self) -> str:
        blob = json.dumps({self.tier: self.to_dict()}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class VerificationResult:
    score: float
    verified_attrs: Tuple[str, ...]
    fingerprint: Optional[str]


def validate_disclosure_request(requested: Iterable[str], policy: TierPolicy) -> None:
    """Reject a request for any attribute the tier does not require.

    Raises:
        DisclosureViolation: listing the extra attribute names in the order
            they were requested (duplicates collapsed).
    """
    allowed = set(policy.required_names)
    extra: List[str] = []
    for name in requested:
        if name not in allowed and name not in extra:
            extra.append(name)
    if extra:
        raise DisclosureViolation(extra, tier=policy.tier)


def verify_credentials(creds: CredentialSet, policy: TierPolicy) -> VerificationResult:
    """Score = total weight of required attributes that are present and verified.

    Attributes outside the policy are ignored. ``math.fsum`` keeps the result
    independent of attribute order.
    """
    verified = [
        name for name in policy.required_names if name in creds and creds[name].verified
    ]
    weights = policy.weights
    score = min(1.0, math.fsum(weights[name] for name in verified))
    return VerificationResult(
        score=score,
        verified_attrs=tuple(sorted(verified)),
        fingerprint=identity_fingerprint(creds, policy),
    )


def normalize_value(value: str) -> str:
    # trim + lowercase only; stronger folding could merge distinct identities
    return value.strip().lower()


def fingerprint_material(creds: CredentialSet, policy: TierPolicy) -> Optional[str]:
    if not policy.strong_attrs:
        return None
    lines = []
    for name in sorted(policy.strong_attrs):
        cred = creds.get(name)
        if cred is None or not cred.verified:
            return None
        lines.append(f"{name}={normalize_value(cred.value)}\n")
    return "".join(lines)


def identity_fingerprint(creds: CredentialSet, policy: TierPolicy) -> Optional[str]:
    """Lowercase hex SHA-256 over the normalised strong attributes.

    Returns ``None`` unless every strong attribute is present and verified,
    and also for tiers that declare no strong attributes.
    """
    material = fingerprint_material(creds, policy)
    if material is None:
        return None
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def credentials_from_json(data: Mapping[str, Any]) -> Dict[str, Credential]:
    """Parse ``{"attr": {"value": "...", "verified": true}}``.

    A bare string value is accepted as an unverified credential.
    """
    creds: Dict[str, Credential] = {}
    for name, raw in data.items():
        if isinstance(raw, str):
            creds[name] = Credential(raw, False)
        elif isinstance(raw, Mapping) and "value" in raw:
            creds[name] = Credential(str(raw["value"]), bool(raw.get("verified", False)))
        else:
            raise InvalidConfig(f"credential {name!r} must be a string or {{value, verified}}")
    return creds
