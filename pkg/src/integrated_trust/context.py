"""Real-time transaction context.

Each transaction is turned into a weight in ``[0, 1]`` from how much money
was at stake, whether the product category matches the one being asked
about, and whether delivery kept its promise. Recommended trust uses these
weights so a rating earned on a costly, on-time sale in the right category
counts for more than one earned on a trivial sale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Dict, Mapping, Optional, Union

from .errors import InvalidConfig

Number = Union[int, float, Decimal]

WEIGHT_TOLERANCE = 1e-9
DEFAULT_COST_CAP = Decimal("10000")


@dataclass(frozen=True)
class ContextWeights:
    w_cost: float = 0.5
    w_scope: float = 0.2
    w_delivery: float = 0.3
    cost_cap: Decimal = DEFAULT_COST_CAP

    def __post_init__(self) -> None:
        for name in ("w_cost", "w_scope", "w_delivery"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InvalidConfig(f"context weight {name} must be in [0, 1], got {value!r}")
        total = math.fsum((self.w_cost, self.w_scope, self.w_delivery))
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidConfig(f"context weights sum to {total!r}, expected 1.0")
        cap = Decimal(str(self.cost_cap))
        if not cap > 0:
            raise InvalidConfig(f"cost_cap must be positive, got {self.cost_cap!r}")
        object.__setattr__(self, "cost_cap", cap)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ContextWeights":
        known = {"w_cost", "w_scope", "w_delivery", "cost_cap"}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown context keys: {sorted(unknown)}")
        kwargs: Dict[str, Any] = {}
        try:
            for key in ("w_cost", "w_scope", "w_delivery"):
                if key in data:
                    kwargs[key] = float(data[key])
            if "cost_cap" in data:
                kwargs["cost_cap"] = Decimal(str(data["cost_cap"]))
        except (TypeError, ValueError, ArithmeticError):
            raise InvalidConfig("context weights must be numeric") from None
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "w_cost": self.w_cost,
            "w_scope": self.w_scope,
            "w_delivery": self.w_delivery,
            "cost_cap": str(self.cost_cap),
        }


@dataclass(frozen=True)
class QueryContext:
    """The product category a trust query is about; ``None`` means any."""

    scope: Optional[str] = None


ANY_CONTEXT = QueryContext()


def cost_norm(cost: Number, cost_cap: Number) -> float:
    """``min(1, log(1 + cost) / log(1 + cost_cap))``."""
    c = float(cost)
    cap = float(cost_cap)
    if c < 0:
        raise ValueError(f"cost must be non-negative, got {cost!r}")
    if cap <= 0:
        raise ValueError(f"cost_cap must be positive, got {cost_cap!r}")
    return min(1.0, math.log1p(c) / math.log1p(cap))


def delivery_score(promised_days: int, actual_days: int) -> float:
    """1.0 when on time or early, falling linearly to 0 at a 100% overrun."""
    if promised_days < 1:
        raise ValueError(f"promised_days must be >= 1, got {promised_days!r}")
    overrun = max(0, actual_days - promised_days)
    return min(1.0, max(0.0, 1.0 - overrun / promised_days))


def scope_match(tx_scope: str, query: QueryContext) -> float:
    if query.scope is None:
        return 1.0
    return 1.0 if tx_scope.casefold() == query.scope.casefold() else 0.0


def context_weight(tx: Any, query: QueryContext, weights: ContextWeights) -> float:
    """Blend the three factors for one transaction.

    ``tx`` needs ``cost``, ``scope``, ``promised_days`` and ``actual_days``
    attributes (a :class:`~integrated_trust.repository.TransactionRecord`).
    """
    value = (
        weights.w_cost * cost_norm(tx.cost, weights.cost_cap)
        + weights.w_scope * scope_match(tx.scope, query)
        + weights.w_delivery * delivery_score(tx.promised_days, tx.actual_days)
    )
    return min(1.0, max(0.0, value))
