"""Direct, credibility and recommended trust over latest-only ratings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from .context import ANY_CONTEXT, ContextWeights, QueryContext, context_weight
from .repository import Rating, RepositoryState

NEUTRAL_PRIOR = 0.5
DENOMINATOR_EPS = 1e-12


@dataclass(frozen=True)
class TrustComponent:
    """One reputation component. ``value`` is ``None`` exactly when ``support == 0``."""

    value: Optional[float]
    support: int = 0

    @property
    def present(self) -> bool:
        return self.support > 0

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "support": self.support}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrustComponent":
        return cls(data["value"], data["support"])


ABSENT = TrustComponent(None, 0)


def _snapshot(repo: Any) -> RepositoryState:
    return repo if isinstance(repo, RepositoryState) else repo.state


def direct_trust(viewer: str, subject: str, repo: Any) -> TrustComponent:
    """The viewer's own latest rating of the subject."""
    state = _snapshot(repo)
    state.principal(viewer)
    state.principal(subject)
    rating = state.latest_rating(viewer, subject)
    if rating is None:
        return ABSENT
    return TrustComponent(rating.value, 1)


def rater_credibility(viewer: str, rater: str, repo: Any) -> float:
    """How far ``viewer`` believes ratings written by ``rater``.

    The viewer's own rating of the rater wins; otherwise the plain mean of
    the latest ratings others gave the rater; otherwise a neutral 0.5.
    Credibilities are not themselves credibility-weighted.
    """
    state = _snapshot(repo)
    state.principal(viewer)
    state.principal(rater)
    own = state.latest_rating(viewer, rater)
    if own is not None:
        return own.value
    incoming = state.ratings_about(rater)
    if incoming:
        return math.fsum(r.value for r in incoming) / len(incoming)
    return NEUTRAL_PRIOR


def weighted_ratings(
    viewer: str,
    subject: str,
    query: QueryContext,
    repo: Any,
    weights: ContextWeights,
    use_credibility: bool = True,
) -> List[Tuple[Rating, float, float]]:
    """``(rating, credibility, context weight)`` for every rating that feeds recommended trust.

    The viewer's own rating is excluded, as is anything written from the
    viewer's identity record. Order follows ``ratings_about``.
    """
    state = _snapshot(repo)
    viewer_record = state.record_id(viewer)
    state.principal(subject)
    out = []
    for rater_record, rating in state.rated_by(subject):
        if rater_record == viewer_record:
            continue
        cred = rater_credibility(viewer, rating.rater, state) if use_credibility else 1.0
        cw = context_weight(state.transaction(rating.tx_id), query, weights)
        out.append((rating, cred, cw))
    return out


def recommended_trust(
    viewer: str,
    subject: str,
    query: Optional[QueryContext],
    repo: Any,
    weights: ContextWeights,
    use_credibility: bool = True,
) -> TrustComponent:
    """Credibility- and context-weighted mean of other principals' ratings of ``subject``.

    With ``use_credibility=False`` every rater counts at credibility 1.0,
    which is what an aggregator blind to rater quality would do.
    """
    terms = weighted_ratings(
        viewer, subject, query or ANY_CONTEXT, repo, weights, use_credibility
    )
    if not terms:
        return ABSENT
    numerator = math.fsum(cred * cw * rating.value for rating, cred, cw in terms)
    denominator = math.fsum(cred * cw for _, cred, cw in terms)
    if denominator < DENOMINATOR_EPS:
        return ABSENT
    contributing = [rating.value for rating, cred, cw in terms if cred * cw > 0]
    # rounding must not push a weighted mean outside its inputs' range
    value = min(max(contributing), max(min(contributing), numerator / denominator))
    return TrustComponent(value, len(contributing))
