"""Engine configuration file.

Top-level keys: ``tiers``, ``integration``, ``context``, ``cache`` and
``repository``. Everything is validated at load time; an invalid file never
reaches a command.

Example::

    {
      "tiers": {"standard": {"required": {"email": 0.2, "payment": 0.3, "gov_id": 0.5},
                             "strong": ["gov_id"]}},
      "integration": {"alpha": 0.2, "beta": 0.3, "gamma": 0.5, "min_verification": 0.2},
      "context": {"w_cost": 0.5, "w_scope": 0.2, "w_delivery": 0.3, "cost_cap": "10000"},
      "cache": {"staleness_events": 0},
      "repository": {"path": "trust-repo"}
    }
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from .context import ContextWeights
from .engine import EngineParams
from .errors import InvalidConfig
from .integrator import IntegrationParams
from .policy import TierPolicy

CONFIG_ENV = "TRUST_CONFIG"
TOP_LEVEL_KEYS = frozenset({"tiers", "integration", "context", "cache", "repository"})

DEFAULT_TIERS: Dict[str, Any] = {
    "standard": {
        "required": {"email": 0.2, "payment": 0.3, "gov_id": 0.5},
        "strong": ["gov_id"],
    }
}


@dataclass(frozen=True)
class EngineConfig:
    params: EngineParams = field(default_factory=lambda: EngineParams(tiers=parse_tiers(DEFAULT_TIERS)))
    repository_path: Optional[str] = None

    @property
    def tiers(self) -> Mapping[str, TierPolicy]:
        return self.params.tiers

    def tier(self, name: str) -> TierPolicy:
        try:
            return self.params.tiers[name]
        except KeyError:
            raise InvalidConfig(f"unknown tier {name!r}") from None

    def to_dict(self) -> Dict[str, Any]:
        out = self.params.to_dict()
        out["repository"] = {"path": self.repository_path}
        return out


def parse_tiers(data: Any) -> Dict[str, TierPolicy]:
    if not isinstance(data, Mapping) or not data:
        raise InvalidConfig("'tiers' must be a non-empty mapping of tier name -> policy")
    return {str(name): TierPolicy.from_dict(str(name), spec) for name, spec in data.items()}


def _section(data: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    value = data.get(key, {})
    if not isinstance(value, Mapping):
        raise InvalidConfig(f"'{key}' must be an object")
    return value


def engine_params_from_dict(data: Mapping[str, Any]) -> EngineParams:
    """Build :class:`EngineParams` from the tiers/integration/context/cache sections."""
    cache = _section(data, "cache")
    unknown = set(cache) - {"staleness_events"}
    if unknown:
        raise InvalidConfig(f"unknown cache keys: {sorted(unknown)}")
    return EngineParams(
        integration=IntegrationParams.from_dict(_section(data, "integration")),
        context=ContextWeights.from_dict(_section(data, "context")),
        staleness_events=cache.get("staleness_events", 0),
        tiers=parse_tiers(data.get("tiers", DEFAULT_TIERS)),
    )


def config_from_dict(data: Any) -> EngineConfig:
    if not isinstance(data, Mapping):
        raise InvalidConfig("config must be a JSON object")
    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        raise InvalidConfig(f"unknown top-level config keys: {sorted(unknown)}")
    repo = _section(data, "repository")
    path = repo.get("path")
    if path is not None and not isinstance(path, str):
        raise InvalidConfig("repository.path must be a string")
    return EngineConfig(params=engine_params_from_dict(data), repository_path=path)


def load_config(path: Optional[Union[str, Path]] = None) -> EngineConfig:
    """Load from ``path``, falling back to ``$TRUST_CONFIG``."""
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if not path:
        raise InvalidConfig(f"no config given (use --config or set {CONFIG_ENV})")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config {str(path)!r} is not valid JSON: {exc}") from None
    return config_from_dict(data)


def deep_merge(base: Mapping[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursively overlay ``overrides`` onto a copy of ``base``."""
    out = copy.deepcopy(dict(base))
    for key, value in overrides.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out
