import json
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from integrated_trust import CorruptLog, Event, InvariantViolation, Repository, UnknownPrincipal, UnknownTransaction
from integrated_trust.repository import EMPTY_STATE, read_log, replay

from conftest import trade


def test_first_event_is_version_one(repo):
    assert repo.register("p1", "standard") == 1
    assert repo.version == 1


def test_self_rating_rejected(repo):
    repo.register("a", "standard")
    repo.register("b", "standard")
    trade(repo, "a", "b", tx_id="t1")
    with pytest.raises(InvariantViolation) as exc:
        repo.upsert_rating("a", "a", 0.5, "t1")
    assert exc.value.rule == "rater != ratee"


def test_overwrite_keeps_latest_only(repo):
    repo.register("a", "standard")
    repo.register("b", "standard")
    trade(repo, "a", "b", tx_id="t1")
    repo.upsert_rating("a", "b", 0.8, "t1")
    repo.upsert_rating("a", "b", 0.4, "t1")
    assert repo.latest_rating("a", "b").value == 0.4
    assert repo.state.rating_count("a", "b") == 1
    assert len(repo.ratings_about("b")) == 1


def test_latest_rating_absent_and_single(repo):
    assert repo.latest_rating("a", "b") is None
    repo.register("a", "standard")
    repo.register("b", "standard")
    trade(repo, "a", "b", tx_id="t1")
    repo.upsert_rating("a", "b", 0.9, "t1", tick=5)
    r = repo.latest_rating("a", "b")
    assert (r.value, r.tick) == (0.9, 5)
    repo.upsert_rating("a", "b", 0.1, "t1")
    assert repo.latest_rating("a", "b").value == 0.1


def test_ratings_about_order_and_latest_only(repo):
    for p in ("b", "c2", "c1"):
        repo.register(p, "standard")
    assert repo.ratings_about("b") == []
    t2 = trade(repo, "c2", "b")
    t1 = trade(repo, "c1", "b")
    repo.upsert_rating("c2", "b", 0.3, t2)
    repo.upsert_rating("c1", "b", 0.7, t1)
    assert [r.rater for r in repo.ratings_about("b")] == ["c1", "c2"]
    # hand replay: three writes by c1 collapse to the last one
    repo.upsert_rating("c1", "b", 0.1, t1)
    repo.upsert_rating("c1", "b", 0.2, t1)
    about = repo.ratings_about("b")
    assert len(about) == 2
    assert [r.value for r in about if r.rater == "c1"] == [0.2]


def test_unknown_references(repo):
    with pytest.raises(UnknownPrincipal):
        repo.add_transaction("t", "x", "y", Decimal(1), "s", 1, 1)
    repo.register("a", "standard")
    repo.register("b", "standard")
    with pytest.raises(UnknownTransaction):
        repo.upsert_rating("a", "b", 0.5, "nope")


@pytest.mark.parametrize(
    "kwargs, rule",
    [
        (dict(cost=Decimal("-1")), "cost >= 0"),
        (dict(promised_days=0), "promised_days >= 1"),
        (dict(actual_days=-1), "actual_days >= 0"),
        (dict(seller="a"), "buyer != seller"),
    ],
)
def test_transaction_invariants(repo, kwargs, rule):
    repo.register("a", "standard")
    repo.register("b", "standard")
    args = dict(tx_id="t", buyer="a", seller="b", cost=Decimal(5), scope="s", promised_days=2, actual_days=2)
    args.update(kwargs)
    with pytest.raises(InvariantViolation) as exc:
        repo.add_transaction(**args)
    assert exc.value.rule == rule


def test_transactions_never_overwritten(repo):
    repo.register("a", "standard")
    repo.register("b", "standard")
    trade(repo, "a", "b", tx_id="t")
    with pytest.raises(InvariantViolation):
        trade(repo, "b", "a", tx_id="t")


def test_float_cost_refused(repo):
    with pytest.raises(TypeError):
        repo.add_transaction("t", "a", "b", 1.5, "s", 1, 1)


def test_rejected_event_leaves_state(repo):
    repo.register("a", "standard")
    before = repo.export_state()
    with pytest.raises(InvariantViolation):
        repo.register("a", "standard")
    assert repo.version == 1
    assert repo.export_state() == before
    assert len(repo.events) == 1


def test_duplicate_fingerprint_links_record(repo):
    repo.register("a", "standard", fingerprint="f" * 64)
    repo.register("a2", "standard", fingerprint="f" * 64)
    assert repo.state.record_id("a2") == "a"
    assert repo.state.records["a"].members == ("a", "a2")


def test_replay_empty():
    state = replay([])
    assert state.version == 0
    assert state.to_json() == EMPTY_STATE.to_json()


def test_replay_gap_detected(repo):
    repo.register("a", "standard")
    repo.register("b", "standard")
    e1, e2 = repo.events
    bad = [e1, Event(3, e2.kind, e2.tick, e2.payload)]
    with pytest.raises(CorruptLog) as exc:
        replay(bad)
    assert exc.value.seq == 3


def test_replay_invalid_event(repo):
    bad = [Event(1, "RatingUpserted", 0, {"rater": "a", "ratee": "b", "value": 0.5, "tx_id": "t"})]
    with pytest.raises(CorruptLog) as exc:
        replay(bad)
    assert exc.value.seq == 1


def test_log_file_roundtrip(tmp_path, policy):
    path = tmp_path / "events.jsonl"
    repo = Repository(path)
    repo.register("a", "standard")
    repo.register("b", "standard")
    trade(repo, "a", "b", cost="12.30", tx_id="t")
    repo.upsert_rating("a", "b", 0.75, "t")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert [json.loads(line)["seq"] for line in lines] == [1, 2, 3, 4]
    tx_line = json.loads(lines[2])
    assert set(tx_line) == {"seq", "kind", "tick", "payload"}
    assert tx_line["payload"]["cost"] == "12.30"
    reopened = Repository.open(path)
    assert reopened.export_state() == repo.export_state()
    assert read_log(path) == list(repo.events)


def test_export_is_canonical(market):
    data = market.export_state()
    assert data == json.dumps(json.loads(data), sort_keys=True, separators=(",", ":"))


# property tests over random event streams

NAMES = ["a", "b", "c", "d", "e"]


@st.composite
def operations(draw):
    ops = []
    for _ in range(draw(st.integers(0, 60))):
        kind = draw(st.sampled_from(["reg", "tx", "rate", "rate", "bad"]))
        ops.append((kind, draw(st.sampled_from(NAMES)), draw(st.sampled_from(NAMES)),
                    draw(st.floats(0, 1)), draw(st.integers(0, 20))))
    return ops


def apply_ops(repo, ops):
    last_written = {}
    applied = 0
    for kind, x, y, value, n in ops:
        before = repo.version
        try:
            if kind == "reg":
                repo.register(x, "standard")
            elif kind == "tx":
                repo.add_transaction(f"t{n}", x, y, Decimal(n), "s", 1 + n % 3, n % 5)
            elif kind == "rate":
                repo.upsert_rating(x, y, value, f"t{n}")
                last_written[(x, y)] = value
            else:
                repo.upsert_rating(x, y, value + 2, f"t{n}")
            applied += 1
            assert repo.version == before + 1
        except Exception:
            assert repo.version == before
    return applied, last_written


@settings(max_examples=60, deadline=None)
@given(operations())
def test_random_streams_invariants(ops):
    repo = Repository()
    applied, last_written = apply_ops(repo, ops)
    assert repo.version == applied == len(repo.events)
    for (x, y), value in last_written.items():
        assert repo.state.rating_count(x, y) == 1
        assert repo.latest_rating(x, y).value == value
    for a in NAMES:
        for b in NAMES:
            assert repo.state.rating_count(a, b) in (0, 1)
    assert replay(repo.events).to_json() == repo.export_state()
