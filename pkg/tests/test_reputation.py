import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from integrated_trust import ContextWeights, QueryContext, Repository, UnknownPrincipal
from integrated_trust.reputation import direct_trust, rater_credibility, recommended_trust

from conftest import trade

W = ContextWeights()


def setup(names):
    repo = Repository()
    for n in names:
        repo.register(n, "standard")
    return repo


def rate(repo, rater, ratee, value, **tx):
    tx_id = trade(repo, rater, ratee, **tx)
    repo.upsert_rating(rater, ratee, value, tx_id)
    return tx_id


def test_direct_trust():
    repo = setup(["v", "s"])
    assert direct_trust("v", "s", repo).support == 0
    assert direct_trust("v", "s", repo).value is None
    rate(repo, "v", "s", 0.9)
    assert direct_trust("v", "s", repo).value == 0.9
    rate(repo, "v", "s", 0.2)
    d = direct_trust("v", "s", repo)
    assert (d.value, d.support) == (0.2, 1)
    with pytest.raises(UnknownPrincipal):
        direct_trust("v", "ghost", repo)


def test_credibility_rules():
    repo = setup(["v", "r", "x", "y"])
    assert rater_credibility("v", "r", repo) == 0.5
    rate(repo, "x", "r", 0.2)
    rate(repo, "y", "r", 0.8)
    # mean of 0.2 and 0.8
    assert rater_credibility("v", "r", repo) == pytest.approx(0.5, abs=1e-15)
    rate(repo, "v", "r", 1.0)
    assert rater_credibility("v", "r", repo) == 1.0


def test_recommended_examples():
    repo = setup(["v", "s", "c1", "c2"])
    assert recommended_trust("v", "s", None, repo, W).support == 0
    rate(repo, "c1", "s", 0.8, cost="10000")
    rec = recommended_trust("v", "s", None, repo, W)
    assert rec.value == pytest.approx(0.8, abs=1e-15) and rec.support == 1
    rate(repo, "c2", "s", 1.0, cost="10000")
    rec = recommended_trust("v", "s", None, repo, W)
    assert rec.value == pytest.approx(0.9, abs=1e-15)


def test_equal_weights_example():
    repo = setup(["v", "s", "c1", "c2"])
    rate(repo, "c1", "s", 0.6, cost="50")
    rate(repo, "c2", "s", 1.0, cost="50")
    # same cost, same delivery, neutral credibility: plain mean
    assert recommended_trust("v", "s", None, repo, W).value == pytest.approx(0.8, abs=1e-12)


def test_recommended_excludes_viewer():
    repo = setup(["v", "s", "c"])
    rate(repo, "c", "s", 0.4)
    before = recommended_trust("v", "s", None, repo, W)
    rate(repo, "v", "s", 1.0)
    after = recommended_trust("v", "s", None, repo, W)
    assert before == after
    assert direct_trust("v", "s", repo).value == 1.0


def test_zero_weight_is_absent():
    repo = setup(["v", "s", "c"])
    rate(repo, "c", "s", 0.9, cost="0", scope="books", promised=2, actual=10)
    w = ContextWeights(0.5, 0.2, 0.3)
    rec = recommended_trust("v", "s", QueryContext("toys"), repo, w)
    assert rec.value is None and rec.support == 0


def test_scope_query_filters():
    repo = setup(["v", "s", "c1", "c2"])
    rate(repo, "c1", "s", 1.0, cost="0", scope="books")
    rate(repo, "c2", "s", 0.0, cost="0", scope="toys")
    w = ContextWeights(0.0, 1.0, 0.0)
    assert recommended_trust("v", "s", QueryContext("books"), repo, w).value == 1.0
    assert recommended_trust("v", "s", QueryContext("toys"), repo, w).value == 0.0


def oracle_recommended(viewer, subject, repo, weights, query):
    """Direct double-loop summation over the exported state."""
    state = repo.state.export()
    by_ratee = state["ratings"].get(subject, {})
    num = den = 0.0
    for rater in sorted(by_ratee):
        if rater == viewer:
            continue
        r = by_ratee[rater]
        tx = state["transactions"][r["tx_id"]]
        own = state["ratings"].get(rater, {}).get(viewer)
        if own is not None:
            cred = own["value"]
        else:
            incoming = [x["value"] for x in state["ratings"].get(rater, {}).values()]
            cred = sum(incoming) / len(incoming) if incoming else 0.5
        cost = float(tx["cost"])
        cn = min(1.0, math.log(1 + cost) / math.log(1 + float(weights.cost_cap)))
        sm = 1.0 if query is None or tx["scope"].lower() == query.lower() else 0.0
        over = max(0, tx["actual_days"] - tx["promised_days"])
        ds = min(1.0, max(0.0, 1 - over / tx["promised_days"]))
        cw = weights.w_cost * cn + weights.w_scope * sm + weights.w_delivery * ds
        num += cred * cw * r["value"]
        den += cred * cw
    return None if den < 1e-12 else num / den


def random_instance(rng, n_raters):
    names = ["v", "s"] + [f"c{i}" for i in range(n_raters)]
    repo = setup(names)
    for i in range(n_raters):
        c = f"c{i}"
        rate(repo, c, "s", rng.choice([0.0, 0.25, 0.5, 1.0, rng.random()]),
             cost=str(rng.choice([0, 1, 99, 5000, 20000])), scope=rng.choice(["books", "toys"]),
             promised=rng.randint(1, 5), actual=rng.randint(0, 10))
        for other in rng.sample(names, rng.randint(0, 2)):
            if other != c:
                rate(repo, other, c, rng.random())
    return repo


@pytest.mark.parametrize("n_raters", [0, 1, 2, 3])
def test_recommended_matches_oracle(n_raters):
    rng = random.Random(1000 + n_raters)
    for _ in range(200):
        repo = random_instance(rng, n_raters)
        query = rng.choice([None, "books"])
        got = recommended_trust("v", "s", QueryContext(query), repo, W)
        expected = oracle_recommended("v", "s", repo, W, query)
        if expected is None:
            assert got.value is None
        else:
            assert abs(got.value - expected) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=6), st.integers(0, 10**4), st.sampled_from([0.0, 1.0]))
def test_convex_and_monotone(values, seed, extra):
    rng = random.Random(seed)
    names = ["v", "s", "new"] + [f"c{i}" for i in range(len(values))]
    repo = setup(names)
    for i, value in enumerate(values):
        rate(repo, f"c{i}", "s", value, cost=str(rng.randint(1, 9000)))
    rec = recommended_trust("v", "s", None, repo, W)
    assert min(values) <= rec.value <= max(values)
    rate(repo, "new", "s", extra, cost=str(rng.randint(1, 9000)))
    after = recommended_trust("v", "s", None, repo, W).value
    if extra == 1.0:
        assert after >= rec.value
    else:
        assert after <= rec.value
