"""Deterministic marketplace scenarios and attack models.

A scenario registers a population of buyers and sellers, then runs a fixed
number of ticks. Every random decision comes from one ``random.Random(seed)``
stream, consumed only through ``random()`` in a fixed order, so the event
log and the metrics are byte-identical for a given config.

Draw order, per tick, per regular transaction (always eight draws, even when
some are unused)::

    buyer index, seller index, cost, promised days,
    outcome, late flag, delay, buyer payment

Attack transactions (slander purchases) follow the regular ones in the same
tick and use the same eight-draw layout with the buyer/seller draws ignored.
Collusion and whitewash consume no draws.

Opinions in the metrics are those of a passive ``observer`` principal who
never transacts, so its view has no direct component and every rater is
judged by its public record.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .config import DEFAULT_TIERS, deep_merge, engine_params_from_dict
from .context import QueryContext
from .engine import EngineParams, TrustEngine
from .errors import BelowVerificationFloor, InvalidConfig, NotAParty
from .integrator import rate_after_transaction, register_with_rebirth_check
from .policy import Credential, TierPolicy
from .repository import Event, Repository, canonical_json

OBSERVER = "observer"
ATTACKS = ("none", "collusion", "slander", "whitewash", "context_exploit")
DRAWS_PER_TX = 8
CENT = Decimal("0.01")


@dataclass(frozen=True)
class AgentProfile:
    role: str
    honesty: float
    count: int = 1
    label: Optional[str] = None
    tier: Optional[str] = None
    verified: Optional[Tuple[str, ...]] = None  # None: every required attribute verifies

    def __post_init__(self) -> None:
        if self.role not in ("buyer", "seller"):
            raise InvalidConfig(f"agent role must be buyer or seller, got {self.role!r}")
        if not (0.0 <= self.honesty <= 1.0):
            raise InvalidConfig(f"honesty must be in [0, 1], got {self.honesty!r}")
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 0:
            raise InvalidConfig(f"agent count must be a non-negative integer, got {self.count!r}")

    @property
    def agent_class(self) -> str:
        if self.label:
            return self.label
        if self.role == "buyer":
            return "buyer"
        return "honest" if self.honesty >= 0.5 else "malicious"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AgentProfile":
        try:
            verified = data.get("verified")
            return cls(
                role=data["role"],
                honesty=float(data["honesty"]),
                count=data.get("count", 1),
                label=data.get("label"),
                tier=data.get("tier"),
                verified=None if verified is None else tuple(verified),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad agent profile {dict(data)!r}: {exc}") from None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"role": self.role, "honesty": self.honesty, "count": self.count}
        if self.label is not None:
            out["label"] = self.label
        if self.tier is not None:
            out["tier"] = self.tier
        if self.verified is not None:
            out["verified"] = list(self.verified)
        return out


@dataclass(frozen=True)
class Attack:
    """Attack model and its parameters.

    ``collusion``: ``ring_size`` malicious sellers trade with each other every
    tick at ``cost`` (default: top of the cost range) and cross-rate 1.0.

    ``slander``: ``attacker_count`` extra buyers buy from ``target`` every
    ``every`` ticks and always rate it 0.0. Each also tries once per tick to
    rate the target on a transaction it was not part of; the engine rejects
    these and they are counted.

    ``whitewash``: at the start of tick ``at_tick`` the seller
    ``fraud_seller`` registers again, with the same strong attributes when
    ``same_identity`` is true and a fresh government id otherwise. Buyers
    then trade with the new id.

    ``context_exploit``: sellers labelled ``label`` (default ``exploit``)
    serve items cheaper than ``threshold`` honestly and never deliver
    anything at or above it.
    """

    kind: str = "none"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ATTACKS:
            raise InvalidConfig(f"unknown attack {self.kind!r}; expected one of {ATTACKS}")

    @classmethod
    def from_dict(cls, data: Any) -> "Attack":
        if data is None or data == "none":
            return cls()
        if not isinstance(data, Mapping) or "type" not in data:
            raise InvalidConfig("attack must be an object with a 'type' key")
        params = {k: v for k, v in data.items() if k != "type"}
        return cls(kind=data["type"], params=params)

    def to_dict(self) -> Dict[str, Any]:
        return {"type": self.kind, **dict(self.params)}


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    ticks: int
    agents: Tuple[AgentProfile, ...]
    attack: Attack = field(default_factory=Attack)
    engine: EngineParams = field(default_factory=lambda: engine_params_from_dict({}))
    tx_per_tick: int = 1
    cost_range: Tuple[Decimal, Decimal] = (Decimal("1"), Decimal("5000"))
    cost_distribution: str = "log_uniform"
    promised_days: Tuple[int, int] = (2, 7)
    late_rate: float = 0.1
    scopes: Tuple[str, ...] = ("electronics", "books", "home")
    selection: str = "uniform"
    query_scope: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("seed", "ticks", "tx_per_tick"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise InvalidConfig(f"{name} must be a non-negative integer, got {value!r}")
        lo, hi = self.cost_range
        if lo < 0 or hi < lo:
            raise InvalidConfig(f"cost_range must satisfy 0 <= lo <= hi, got {self.cost_range!r}")
        if self.cost_distribution not in ("uniform", "log_uniform"):
            raise InvalidConfig("cost_distribution must be 'uniform' or 'log_uniform'")
        if self.cost_distribution == "log_uniform" and lo <= 0:
            raise InvalidConfig("log_uniform costs need a positive lower bound")
        plo, phi = self.promised_days
        if plo < 1 or phi < plo:
            raise InvalidConfig(f"promised_days must satisfy 1 <= lo <= hi, got {self.promised_days!r}")
        if not (0.0 <= self.late_rate <= 1.0):
            raise InvalidConfig("late_rate must be in [0, 1]")
        if not self.scopes:
            raise InvalidConfig("scopes must be non-empty")
        if self.selection not in ("uniform", "trust_proportional"):
            raise InvalidConfig("selection must be 'uniform' or 'trust_proportional'")
        if not any(a.role == "buyer" and a.count for a in self.agents):
            raise InvalidConfig("scenario needs at least one buyer")
        if not any(a.role == "seller" and a.count for a in self.agents):
            raise InvalidConfig("scenario needs at least one seller")
        for agent in self.agents:
            self.policy_for(agent)

    def policy_for(self, agent: AgentProfile) -> TierPolicy:
        tiers = self.engine.tiers
        if not tiers:
            raise InvalidConfig("engine config defines no tiers")
        name = agent.tier or sorted(tiers)[0]
        if name not in tiers:
            raise InvalidConfig(f"agent tier {name!r} not defined")
        return tiers[name]

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioConfig":
        if not isinstance(data, Mapping):
            raise InvalidConfig("scenario must be a JSON object")
        known = {
            "seed", "ticks", "agents", "attack", "engine", "tx_per_tick", "cost_range",
            "cost_distribution", "promised_days", "late_rate", "scopes", "selection",
            "query_scope",
        }
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown scenario keys: {sorted(unknown)}")
        try:
            kwargs: Dict[str, Any] = {
                "seed": data["seed"],
                "ticks": data["ticks"],
                "agents": tuple(AgentProfile.from_dict(a) for a in data["agents"]),
            }
        except (KeyError, TypeError) as exc:
            raise InvalidConfig(f"scenario missing or malformed field: {exc}") from None
        kwargs["attack"] = Attack.from_dict(data.get("attack"))
        engine = dict(data.get("engine", {}))
        engine.setdefault("tiers", DEFAULT_TIERS)
        kwargs["engine"] = engine_params_from_dict(engine)
        for key in ("tx_per_tick", "cost_distribution", "selection", "query_scope"):
            if key in data:
                kwargs[key] = data[key]
        if "late_rate" in data:
            kwargs["late_rate"] = float(data["late_rate"])
        try:
            if "cost_range" in data:
                lo, hi = data["cost_range"]
                kwargs["cost_range"] = (Decimal(str(lo)), Decimal(str(hi)))
            if "promised_days" in data:
                plo, phi = data["promised_days"]
                kwargs["promised_days"] = (int(plo), int(phi))
        except (TypeError, ValueError, ArithmeticError):
            raise InvalidConfig("cost_range and promised_days must be [lo, hi] pairs") from None
        if "scopes" in data:
            kwargs["scopes"] = tuple(data["scopes"])
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "ticks": self.ticks,
            "agents": [a.to_dict() for a in self.agents],
            "attack": self.attack.to_dict(),
            "engine": self.engine.to_dict(),
            "tx_per_tick": self.tx_per_tick,
            "cost_range": [str(self.cost_range[0]), str(self.cost_range[1])],
            "cost_distribution": self.cost_distribution,
            "promised_days": list(self.promised_days),
            "late_rate": self.late_rate,
            "scopes": list(self.scopes),
            "selection": self.selection,
            "query_scope": self.query_scope,
        }

    def with_engine_overrides(self, overrides: Mapping[str, Any]) -> "ScenarioConfig":
        merged = deep_merge(self.engine.to_dict(), overrides)
        return replace(self, engine=engine_params_from_dict(merged))


@dataclass
class MetricsReport:
    metadata: Dict[str, Any]
    classes: Dict[str, Dict[str, Any]]
    separation: Optional[float]
    final_opinions: Dict[str, Optional[float]]
    timeseries: List[Dict[str, Any]]
    attack: Dict[str, Any]
    counts: Dict[str, int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "metadata": self.metadata,
            "classes": self.classes,
            "separation": self.separation,
            "final_opinions": self.final_opinions,
            "timeseries": self.timeseries,
            "attack": self.attack,
            "counts": self.counts,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict()) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["tick", "class", "mean", "min", "max"])
        for row in self.timeseries:
            writer.writerow([row["tick"], row["class"], row["mean"], row["min"], row["max"]])
        return buf.getvalue()


def class_stats(values: Sequence[float]) -> Dict[str, Any]:
    if not values:
        return {"mean": None, "min": None, "max": None, "count": 0}
    return {
        "mean": math.fsum(values) / len(values),
        "min": min(values),
        "max": max(values),
        "count": len(values),
    }


@dataclass
class _Agent:
    slot: str
    current_id: str
    profile: AgentProfile
    creds: Dict[str, Credential]


class _Run:
    def __init__(self, config: ScenarioConfig) -> None:
        self.config = config
        self.rng = random.Random(config.seed)
        self.repo = Repository()
        self.engine = TrustEngine(self.repo, config.engine)
        self.query = QueryContext(config.query_scope)
        self.buyers: List[_Agent] = []
        self.sellers: List[_Agent] = []
        self.tx_counter = 0
        self.rejected_ratings = 0
        self.attack_info: Dict[str, Any] = {"type": config.attack.kind}
        self.timeseries: List[Dict[str, Any]] = []

    # setup

    def _credentials(self, agent_id: str, profile: AgentProfile, gov_suffix: str = "") -> Dict[str, Credential]:
        policy = self.config.policy_for(profile)
        verified = set(policy.required_names if profile.verified is None else profile.verified)
        creds = {}
        for name in policy.required_names:
            value = f"{name}:{agent_id}{gov_suffix if name in policy.strong_attrs else ''}"
            creds[name] = Credential(value, name in verified)
        return creds

    def _register(self, agent_id: str, profile: AgentProfile, creds: Dict[str, Credential], tick: int):
        return register_with_rebirth_check(
            creds, self.config.policy_for(profile), self.repo, principal_id=agent_id, tick=tick
        )

    def setup(self) -> None:
        counters = {"buyer": 0, "seller": 0}
        for profile in self.config.agents:
            for _ in range(profile.count):
                agent_id = f"{profile.role}-{counters[profile.role]:02d}"
                counters[profile.role] += 1
                agent = _Agent(agent_id, agent_id, profile, self._credentials(agent_id, profile))
                (self.buyers if profile.role == "buyer" else self.sellers).append(agent)
        observer = AgentProfile(role="buyer", honesty=1.0, label="observer")
        self.observer_creds = self._credentials(OBSERVER, observer)
        self._register(OBSERVER, observer, self.observer_creds, 0)
        for agent in self.buyers + self.sellers:
            self._register(agent.current_id, agent.profile, agent.creds, 0)
        self._setup_attack()

    def _setup_attack(self) -> None:
        attack = self.config.attack
        p = attack.params
        if attack.kind == "collusion":
            ring_size = int(p.get("ring_size", 3))
            malicious = [s for s in self.sellers if s.profile.agent_class == "malicious"]
            if ring_size < 2 or ring_size > len(malicious):
                raise InvalidConfig(
                    f"collusion ring_size {ring_size} needs 2..{len(malicious)} malicious sellers"
                )
            self.ring = malicious[:ring_size]
            self.ring_cost = Decimal(str(p.get("cost", self.config.cost_range[1])))
            self.attack_info["ring"] = [a.slot for a in self.ring]
        elif attack.kind == "slander":
            count = int(p.get("attacker_count", 3))
            target = p.get("target", self.sellers[0].slot)
            matches = [s for s in self.sellers if s.slot == target]
            if not matches or count < 1:
                raise InvalidConfig(f"slander target {target!r} is not a seller or attacker_count < 1")
            self.slander_target = matches[0]
            self.slander_every = max(1, int(p.get("every", 10)))
            profile = AgentProfile(role="buyer", honesty=1.0, label="slanderer")
            self.slanderers = []
            for i in range(count):
                agent_id = f"slanderer-{i:02d}"
                agent = _Agent(agent_id, agent_id, profile, self._credentials(agent_id, profile))
                self._register(agent_id, profile, agent.creds, 0)
                self.slanderers.append(agent)
            self.attack_info.update(target=target, attackers=[a.slot for a in self.slanderers])
        elif attack.kind == "whitewash":
            fraud = p.get("fraud_seller")
            matches = [s for s in self.sellers if s.slot == fraud] if fraud else [
                s for s in self.sellers if s.profile.agent_class == "malicious"
            ][:1]
            if not matches:
                raise InvalidConfig(f"whitewash fraud_seller {fraud!r} not found")
            self.whitewasher = matches[0]
            self.rebirth_tick = int(p.get("at_tick", max(1, self.config.ticks // 2)))
            self.same_identity = bool(p.get("same_identity", True))
            self.attack_info.update(
                fraud_seller=self.whitewasher.slot,
                at_tick=self.rebirth_tick,
                same_identity=self.same_identity,
            )
        elif attack.kind == "context_exploit":
            label = p.get("label", "exploit")
            self.exploit_threshold = Decimal(str(p.get("threshold", "100")))
            exploiters = [s.slot for s in self.sellers if s.profile.agent_class == label]
            if not exploiters:
                raise InvalidConfig(f"context_exploit needs sellers labelled {label!r}")
            self.exploit_label = label
            self.attack_info.update(sellers=exploiters, threshold=str(self.exploit_threshold))

    # per-transaction mechanics

    def _draw_cost(self, u: float) -> Decimal:
        lo, hi = (float(x) for x in self.config.cost_range)
        if self.config.cost_distribution == "log_uniform":
            x = math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))
        else:
            x = lo + u * (hi - lo)
        return min(self.config.cost_range[1], max(self.config.cost_range[0], Decimal(x).quantize(CENT, ROUND_HALF_EVEN)))

    def _satisfactory(self, seller: _Agent, cost: Decimal, u: float) -> bool:
        if self.config.attack.kind == "context_exploit" and seller.profile.agent_class == self.exploit_label:
            if cost >= self.exploit_threshold:
                return False
        return u < seller.profile.honesty

    def _next_tx_id(self) -> str:
        self.tx_counter += 1
        return f"tx-{self.tx_counter:06d}"

    def _transact(
        self,
        buyer: _Agent,
        seller: _Agent,
        draws: Sequence[float],
        tick: int,
        buyer_rating: Optional[float] = None,
    ) -> str:
        _, _, u_cost, u_promised, u_outcome, u_late, u_delay, u_pay = draws
        cost = self._draw_cost(u_cost)
        lo, hi = self.config.promised_days
        promised = lo + min(hi - lo, int(u_promised * (hi - lo + 1)))
        late = u_late < self.config.late_rate
        actual = promised + (1 + min(promised - 1, int(u_delay * promised)) if late else 0)
        good = self._satisfactory(seller, cost, u_outcome)
        scope = self.config.scopes[self.sellers.index(seller) % len(self.config.scopes)]
        tx_id = self._next_tx_id()
        self.repo.add_transaction(
            tx_id, buyer.current_id, seller.current_id, cost, scope, promised, actual, tick
        )
        value = (1.0 if good else 0.0) if buyer_rating is None else buyer_rating
        rate_after_transaction(buyer.current_id, seller.current_id, tx_id, value, self.repo, tick)
        paid = 1.0 if u_pay < buyer.profile.honesty else 0.0
        rate_after_transaction(seller.current_id, buyer.current_id, tx_id, paid, self.repo, tick)
        return tx_id

    def _observer_score(self, agent_id: str) -> Optional[float]:
        try:
            return self.engine.opinion(OBSERVER, agent_id, self.query.scope, mode="atc").score
        except BelowVerificationFloor:
            return None

    def _pick_seller(self, u: float) -> _Agent:
        if self.config.selection == "uniform":
            return self.sellers[min(len(self.sellers) - 1, int(u * len(self.sellers)))]
        scores = [self._observer_score(s.current_id) or 0.0 for s in self.sellers]
        total = math.fsum(scores)
        if total <= 0:
            return self.sellers[min(len(self.sellers) - 1, int(u * len(self.sellers)))]
        target = u * total
        acc = 0.0
        for seller, score in zip(self.sellers, scores):
            acc += score
            if target < acc:
                return seller
        return self.sellers[-1]

    # attack steps

    def _collusion_step(self, tick: int) -> None:
        k = len(self.ring)
        for i, member in enumerate(self.ring):
            partner = self.ring[(i + 1) % k]
            tx_id = self._next_tx_id()
            scope = self.config.scopes[self.sellers.index(partner) % len(self.config.scopes)]
            self.repo.add_transaction(
                tx_id, member.current_id, partner.current_id, self.ring_cost, scope, 1, 1, tick
            )
            rate_after_transaction(member.current_id, partner.current_id, tx_id, 1.0, self.repo, tick)
            rate_after_transaction(partner.current_id, member.current_id, tx_id, 1.0, self.repo, tick)

    def _slander_step(self, tick: int, last_foreign_tx: Optional[str]) -> None:
        target = self.slander_target
        for attacker in self.slanderers:
            if last_foreign_tx is not None:
                try:
                    rate_after_transaction(
                        attacker.current_id, target.current_id, last_foreign_tx, 0.0, self.repo, tick
                    )
                except NotAParty:
                    self.rejected_ratings += 1
        if tick % self.slander_every == 0:
            for attacker in self.slanderers:
                draws = [self.rng.random() for _ in range(DRAWS_PER_TX)]
                self._transact(attacker, target, draws, tick, buyer_rating=0.0)

    def _whitewash(self, tick: int) -> None:
        agent = self.whitewasher
        old_id = agent.current_id
        viewers = [OBSERVER] + [b.current_id for b in self.buyers]
        pre = {v: self.engine.opinion(v, old_id, self.query.scope, mode="dtc").score for v in viewers}
        new_id = f"{agent.slot}-reborn"
        if self.same_identity:
            creds = agent.creds
        else:
            creds = self._credentials(agent.slot, agent.profile, gov_suffix="-fresh")
        reg = self._register(new_id, agent.profile, creds, tick)
        agent.current_id = new_id
        agent.creds = creds
        post = {v: self.engine.opinion(v, new_id, self.query.scope, mode="dtc").score for v in viewers}
        self.attack_info.update(
            old_id=old_id,
            new_id=new_id,
            linked=reg.linked,
            verification=reg.verification.score,
            pre_opinions=pre,
            post_opinions=post,
        )

    # metrics

    def _record(self, tick: int) -> Dict[str, Optional[float]]:
        opinions: Dict[str, Optional[float]] = {}
        by_class: Dict[str, List[float]] = {}
        for seller in self.sellers:
            score = self._observer_score(seller.current_id)
            opinions[seller.slot] = score
            by_class.setdefault(seller.profile.agent_class, [])
            if score is not None:
                by_class[seller.profile.agent_class].append(score)
        for cls in sorted(by_class):
            stats = class_stats(by_class[cls])
            self.timeseries.append(
                {"tick": tick, "class": cls, "mean": stats["mean"], "min": stats["min"], "max": stats["max"]}
            )
        self.last_by_class = by_class
        return opinions

    def run(self) -> Tuple[List[Event], MetricsReport]:
        self.setup()
        final = self._record(0)
        kind = self.config.attack.kind
        for tick in range(1, self.config.ticks + 1):
            if kind == "whitewash" and tick == self.rebirth_tick:
                self._whitewash(tick)
            last_foreign_tx = None
            for _ in range(self.config.tx_per_tick):
                draws = [self.rng.random() for _ in range(DRAWS_PER_TX)]
                buyer = self.buyers[min(len(self.buyers) - 1, int(draws[0] * len(self.buyers)))]
                seller = self._pick_seller(draws[1])
                tx_id = self._transact(buyer, seller, draws, tick)
                if kind == "slander" and seller is not self.slander_target:
                    last_foreign_tx = tx_id
            if kind == "collusion":
                self._collusion_step(tick)
            elif kind == "slander":
                self._slander_step(tick, last_foreign_tx)
            final = self._record(tick)
        return list(self.repo.events), self._report(final)

    def _report(self, final: Dict[str, Optional[float]]) -> MetricsReport:
        classes = {cls: class_stats(values) for cls, values in sorted(self.last_by_class.items())}
        honest = classes.get("honest", {}).get("mean")
        malicious = classes.get("malicious", {}).get("mean")
        separation = None if honest is None or malicious is None else honest - malicious
        state = self.repo.state
        if self.config.attack.kind == "slander":
            self.attack_info["rejected_ratings"] = self.rejected_ratings
        return MetricsReport(
            metadata={
                "seed": self.config.seed,
                "ticks": self.config.ticks,
                "viewer": OBSERVER,
                "config": self.config.to_dict(),
                "params_digest": self.config.engine.digest(),
            },
            classes=classes,
            separation=separation,
            final_opinions=final,
            timeseries=self.timeseries,
            attack=self.attack_info,
            counts={
                "events": state.version,
                "principals": len(state.principals),
                "transactions": len(state.transactions),
                "ratings": state.total_ratings(),
                "rejected_ratings": self.rejected_ratings,
            },
        )


def run_scenario(config: ScenarioConfig) -> Tuple[List[Event], MetricsReport]:
    """Simulate ``config`` and return its event log and metrics."""
    return _Run(config).run()


def run_scenario_repo(config: ScenarioConfig) -> Tuple[Repository, MetricsReport]:
    """Like :func:`run_scenario` but hands back the live repository too."""
    run = _Run(config)
    _, report = run.run()
    return run.repo, report


@dataclass
class Comparison:
    variants: List[str]
    reports: Dict[str, MetricsReport]
    same_event_stream: bool

    def rows(self) -> List[Dict[str, Any]]:
        out = []
        for name in self.variants:
            report = self.reports[name]
            for cls, stats in report.classes.items():
                out.append(
                    {
                        "variant": name,
                        "class": cls,
                        "mean": stats["mean"],
                        "min": stats["min"],
                        "max": stats["max"],
                        "separation": report.separation,
                    }
                )
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = ["variant", "class", "mean", "min", "max", "separation"]
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: "" if row[k] is None else row[k] for k in fields})
        return buf.getvalue()

    def opinion(self, variant: str, agent: str) -> Optional[float]:
        return self.reports[variant].final_opinions[agent]


def compare_runs(config: ScenarioConfig, variants: Sequence[Mapping[str, Any]]) -> Comparison:
    """Run ``config`` once per variant, changing only engine parameters.

    Each variant is ``{"name": ..., "overrides": {...}}`` where overrides use
    the engine config layout (``integration``, ``context``, ``cache``,
    ``tiers``). The seed and population are shared, so with uniform seller
    selection every variant replays the same event stream.
    """
    names: List[str] = []
    reports: Dict[str, MetricsReport] = {}
    logs = []
    for i, variant in enumerate(variants):
        if not isinstance(variant, Mapping):
            raise InvalidConfig("each variant must be an object")
        name = str(variant.get("name", f"variant-{i}"))
        if name in reports:
            raise InvalidConfig(f"duplicate variant name {name!r}")
        overrides = variant.get("overrides", {})
        if not isinstance(overrides, Mapping):
            raise InvalidConfig(f"variant {name!r}: overrides must be an object")
        bad = set(overrides) - {"integration", "context", "cache", "tiers"}
        if bad:
            raise InvalidConfig(f"variant {name!r} may only override engine params, got {sorted(bad)}")
        events, report = run_scenario(config.with_engine_overrides(overrides))
        names.append(name)
        reports[name] = report
        logs.append("".join(e.to_json() for e in events))
    return Comparison(names, reports, same_event_stream=len(set(logs)) <= 1)
