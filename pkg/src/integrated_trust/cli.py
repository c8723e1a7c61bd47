"""``integrated-trust`` command line tool.

A repository is a directory holding ``events.jsonl`` (the log),
``state.json`` (canonical export written after every mutation),
``config.json`` (copied by ``init``) and ``atc_cache.json``.

Exit codes: 0 success, 1 domain error, 2 usage or configuration error.
Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Optional, Sequence

from .config import CONFIG_ENV, EngineConfig, load_config
from .engine import AtcCache, TrustEngine
from .errors import InvalidConfig, TrustError
from .integrator import rate_after_transaction, register_with_rebirth_check
from .policy import credentials_from_json
from .repository import EMPTY_STATE, Repository, canonical_json, read_log, replay
from .simulator import ScenarioConfig, compare_runs, run_scenario

LOG_FILE = "events.jsonl"
STATE_FILE = "state.json"
CONFIG_FILE = "config.json"
CACHE_FILE = "atc_cache.json"


class RepositoryExists(TrustError):
    pass


class ReplayMismatch(TrustError):
    pass


def _emit(obj: Any) -> None:
    sys.stdout.write(canonical_json(obj) + "\n")


def _read_json_file(path: str, what: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidConfig(f"cannot read {what} {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{what} {path!r} is not valid JSON: {exc}") from None


def _resolve_config(args: argparse.Namespace, repo_dir: Optional[Path] = None) -> EngineConfig:
    if args.config:
        return load_config(args.config)
    try:
        return load_config(None)
    except InvalidConfig:
        if repo_dir is not None and (repo_dir / CONFIG_FILE).exists():
            return load_config(repo_dir / CONFIG_FILE)
        raise


def _repo_dir(args: argparse.Namespace, config: Optional[EngineConfig] = None) -> Path:
    path = args.repo or (config.repository_path if config else None)
    if not path:
        raise InvalidConfig("no repository given (use --repo or repository.path in config)")
    return Path(path)


def _open_repo(args: argparse.Namespace):
    repo_dir = Path(args.repo) if args.repo else None
    config = _resolve_config(args, repo_dir)
    repo_dir = _repo_dir(args, config)
    log = repo_dir / LOG_FILE
    if not log.exists():
        raise InvalidConfig(f"{str(repo_dir)!r} is not an initialised repository (run init)")
    return config, repo_dir, Repository.open(log)


def _save_state(repo_dir: Path, repo: Repository) -> None:
    (repo_dir / STATE_FILE).write_text(repo.export_state() + "\n", encoding="utf-8")


def _next_tick(repo: Repository) -> int:
    return repo.state.tick + 1


def cmd_init(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    repo_dir = _repo_dir(args, config)
    log = repo_dir / LOG_FILE
    if log.exists() and log.stat().st_size > 0:
        raise RepositoryExists(f"repository {str(repo_dir)!r} already has events")
    repo_dir.mkdir(parents=True, exist_ok=True)
    log.write_text("", encoding="utf-8")
    (repo_dir / STATE_FILE).write_text(EMPTY_STATE.to_json() + "\n", encoding="utf-8")
    (repo_dir / CONFIG_FILE).write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _emit({"repo": str(repo_dir), "version": 0})
    return 0


def cmd_register(args: argparse.Namespace) -> int:
    config, repo_dir, repo = _open_repo(args)
    raw = args.attrs
    if raw.startswith("@"):
        data = _read_json_file(raw[1:], "attrs file")
    else:
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"--attrs is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidConfig("--attrs must be a JSON object")
    creds = credentials_from_json(data)
    policy = config.tier(args.tier)
    reg = register_with_rebirth_check(
        creds, policy, repo, principal_id=args.id, tick=_next_tick(repo)
    )
    _save_state(repo_dir, repo)
    _emit({**reg.to_dict(), "version": repo.version})
    return 0


def _decimal(text: str) -> Decimal:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise InvalidConfig(f"--cost must be a decimal number, got {text!r}") from None
    if not value.is_finite():
        raise InvalidConfig("--cost must be finite")
    return value


def cmd_tx(args: argparse.Namespace) -> int:
    _, repo_dir, repo = _open_repo(args)
    tx_id = args.id or f"tx-{len(repo.state.transactions) + 1:06d}"
    repo.add_transaction(
        tx_id,
        args.buyer,
        args.seller,
        _decimal(args.cost),
        args.scope,
        args.promised,
        args.actual,
        tick=_next_tick(repo),
    )
    _save_state(repo_dir, repo)
    _emit({"tx_id": tx_id, "version": repo.version})
    return 0


def cmd_rate(args: argparse.Namespace) -> int:
    _, repo_dir, repo = _open_repo(args)
    version = rate_after_transaction(
        args.rater, args.ratee, args.tx, args.value, repo, tick=_next_tick(repo)
    )
    _save_state(repo_dir, repo)
    _emit({"version": version})
    return 0


def cmd_opinion(args: argparse.Namespace) -> int:
    config, repo_dir, repo = _open_repo(args)
    params = config.params
    cache_path = repo_dir / CACHE_FILE
    cache = AtcCache.load(cache_path, params.staleness_events) if args.mode == "atc" else None
    engine = TrustEngine(repo, params, cache)
    opinion = engine.opinion(args.viewer, args.subject, args.scope, mode=args.mode)
    if cache is not None:
        cache.save(cache_path)
    _emit(opinion.to_dict())
    return 0


def _load_scenario(path: str) -> ScenarioConfig:
    return ScenarioConfig.from_dict(_read_json_file(path, "scenario"))


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_scenario(args.scenario)
    events, report = run_scenario(config)
    if args.out_dir is None:
        sys.stdout.write(report.to_json())
        return 0
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    state = replay(events)
    (out / LOG_FILE).write_text("".join(e.to_json() + "\n" for e in events), encoding="utf-8")
    (out / STATE_FILE).write_text(state.to_json() + "\n", encoding="utf-8")
    (out / "metrics.json").write_text(report.to_json(), encoding="utf-8")
    (out / "metrics.csv").write_text(report.to_csv(), encoding="utf-8")
    _emit({"out_dir": str(out), "events": len(events), "separation": report.separation})
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    config = _load_scenario(args.scenario)
    variants = _read_json_file(args.variants, "variants file")
    if isinstance(variants, dict):
        variants = variants.get("variants")
    if not isinstance(variants, list) or not variants:
        raise InvalidConfig("variants file must hold a non-empty list of variants")
    comparison = compare_runs(config, variants)
    sys.stdout.write(comparison.to_csv())
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    if not args.repo:
        raise InvalidConfig("replay needs --repo")
    repo_dir = Path(args.repo)
    log = repo_dir / LOG_FILE
    if not log.exists():
        raise InvalidConfig(f"no event log at {str(log)!r}")
    state = replay(read_log(log))
    result = {"version": state.version}
    if args.verify:
        state_file = repo_dir / STATE_FILE
        if not state_file.exists():
            raise InvalidConfig(f"no state export at {str(state_file)!r}")
        expected = state_file.read_text(encoding="utf-8").rstrip("\n")
        if expected != state.to_json():
            raise ReplayMismatch("replayed state differs from state export", version=state.version)
        result["ok"] = True
    else:
        result["state"] = state.export()
    _emit(result)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"engine config JSON (default: ${CONFIG_ENV})")
    common.add_argument("--repo", help="repository directory")

    parser = argparse.ArgumentParser(
        prog="integrated-trust",
        description="Policy + reputation trust engine with an event-log repository.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", parents=[common], help="create an empty repository")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("register", parents=[common], help="register a principal")
    p.add_argument("--attrs", required=True, help="credentials JSON, or @file")
    p.add_argument("--tier", required=True)
    p.add_argument("--id", help="principal id (default: next p<N>)")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("tx", parents=[common], help="record a completed transaction")
    p.add_argument("--buyer", required=True)
    p.add_argument("--seller", required=True)
    p.add_argument("--cost", required=True)
    p.add_argument("--scope", required=True)
    p.add_argument("--promised", required=True, type=int)
    p.add_argument("--actual", required=True, type=int)
    p.add_argument("--id", help="transaction id (default: next tx-NNNNNN)")
    p.set_defaults(func=cmd_tx)

    p = sub.add_parser("rate", parents=[common], help="rate the other party of a transaction")
    p.add_argument("--rater", required=True)
    p.add_argument("--ratee", required=True)
    p.add_argument("--tx", required=True)
    p.add_argument("--value", required=True, type=float)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("opinion", parents=[common], help="print a trust opinion as JSON")
    p.add_argument("--viewer", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--scope")
    p.add_argument("--mode", choices=("atc", "dtc"), default="dtc")
    p.set_defaults(func=cmd_opinion)

    p = sub.add_parser("simulate", parents=[common], help="run a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="A/B engine parameters on one scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--variants", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("replay", parents=[common], help="rebuild state from the log")
    p.add_argument("--verify", action="store_true", help="compare against state.json")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        sys.stderr.write(canonical_json(exc.to_dict()) + "\n")
        return 2
    except TrustError as exc:
        sys.stderr.write(canonical_json(exc.to_dict()) + "\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
