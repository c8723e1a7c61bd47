import pytest

from integrated_trust import (
    BelowVerificationFloor,
    ContextWeights,
    DisclosureViolation,
    IntegrationParams,
    InvalidConfig,
    NotAParty,
    SelfOpinion,
    UnknownPrincipal,
    UnknownTransaction,
    ValueOutOfRange,
)
from integrated_trust.integrator import combine, rate_after_transaction, register_with_rebirth_check, trust_opinion
from integrated_trust.reputation import ABSENT, TrustComponent

from conftest import full_creds, register, trade

P = IntegrationParams(0.2, 0.3, 0.5)
W = ContextWeights()


def test_params_validation():
    with pytest.raises(InvalidConfig):
        IntegrationParams(0.5, 0.5, 0.5)


@pytest.mark.parametrize(
    "direct, recommended, expected, used",
    [
        # V only: passthrough
        (None, None, 0.6, {"V"}),
        # (0.2*0.6 + 0.3*0.8) / 0.5
        (0.8, None, 0.72, {"V", "D"}),
        # (0.2*0.6 + 0.5*0.4) / 0.7
        (None, 0.4, 0.32 / 0.7, {"V", "R"}),
        # 0.2*0.6 + 0.3*0.8 + 0.5*0.4
        (0.8, 0.4, 0.56, {"V", "D", "R"}),
    ],
)
def test_combine_presence_patterns(direct, recommended, expected, used):
    d = ABSENT if direct is None else TrustComponent(direct, 1)
    r = ABSENT if recommended is None else TrustComponent(recommended, 3)
    score, components = combine(0.6, d, r, P)
    assert score == pytest.approx(expected, abs=1e-12)
    assert components == frozenset(used)


def test_combine_full_example():
    score, _ = combine(1.0, TrustComponent(0.5, 1), TrustComponent(0.5, 2), P)
    assert score == pytest.approx(0.60, abs=1e-12)


def test_combine_scale_consistent():
    d, r = TrustComponent(0.3, 1), TrustComponent(0.9, 2)
    base, _ = combine(0.7, d, r, P)
    # same weights scaled by 2 and renormalised by hand
    raw = (0.4 * 0.7 + 0.6 * 0.3 + 1.0 * 0.9) / 2.0
    assert base == pytest.approx(raw, abs=1e-12)


def test_cold_start_passthrough(market):
    op = trust_opinion("b1", "s1", None, market, P, W)
    assert op.score == op.verification == 1.0
    assert op.components_used == frozenset({"V"})


def test_cold_start_partial_verification(repo, policy):
    register(repo, policy, "v")
    register(repo, policy, "s", verified=("payment", "gov_id"))
    op = trust_opinion("v", "s", None, repo, P, W)
    assert op.score == op.verification == 0.8


def test_opinion_errors(market, repo, policy):
    with pytest.raises(UnknownPrincipal):
        trust_opinion("b1", "ghost", None, market, P, W)
    with pytest.raises(SelfOpinion):
        trust_opinion("b1", "b1", None, market, P, W)
    register(repo, policy, "weak", verified=())
    with pytest.raises(BelowVerificationFloor) as exc:
        trust_opinion("b1", "weak", None, repo, P, W)
    assert exc.value.floor == 0.2


def test_cross_rating(market):
    tx = trade(market, "b1", "s1")
    rate_after_transaction("b1", "s1", tx, 0.9, market)
    rate_after_transaction("s1", "b1", tx, 0.7, market)
    assert market.latest_rating("b1", "s1").value == 0.9
    assert market.latest_rating("s1", "b1").value == 0.7


def test_rating_guards(market):
    tx = trade(market, "b1", "s1")
    with pytest.raises(NotAParty):
        rate_after_transaction("b2", "s1", tx, 0.0, market)
    with pytest.raises(NotAParty):
        rate_after_transaction("b1", "s2", tx, 0.0, market)
    with pytest.raises(UnknownTransaction):
        rate_after_transaction("b1", "s1", "missing", 0.5, market)
    for bad in (1.5, -0.1, float("nan")):
        with pytest.raises(ValueOutOfRange):
            rate_after_transaction("b1", "s1", tx, bad, market)
    assert market.state.total_ratings() == 0


def test_second_tx_overwrites(market):
    t1 = trade(market, "b1", "s1")
    t2 = trade(market, "b1", "s1")
    rate_after_transaction("b1", "s1", t1, 0.9, market)
    rate_after_transaction("b1", "s1", t2, 0.3, market)
    r = market.latest_rating("b1", "s1")
    assert (r.value, r.tx_id) == (0.3, t2)
    assert market.state.rating_count("b1", "s1") == 1


def test_registration_paths(repo, policy):
    first = register_with_rebirth_check(full_creds("x", gov="G1"), policy, repo, principal_id="x")
    assert not first.linked and first.record_id == "x"
    again = register_with_rebirth_check(full_creds("x-again", gov="g1 "), policy, repo, principal_id="x2")
    assert again.linked and again.record_id == "x"
    other = register_with_rebirth_check(full_creds("y", gov="G2"), policy, repo, principal_id="y")
    assert not other.linked
    auto = register_with_rebirth_check(full_creds("z", gov="G3"), policy, repo)
    assert auto.principal_id == "p4"


def test_registration_disclosure(repo, policy):
    creds = dict(full_creds("x"))
    from integrated_trust import Credential
    creds["mother_maiden_name"] = Credential("smith", True)
    with pytest.raises(DisclosureViolation) as exc:
        register_with_rebirth_check(creds, policy, repo)
    assert exc.value.extra == ["mother_maiden_name"]
    assert repo.version == 0


def test_rebirth_shares_reputation(market, policy):
    for b, v in (("b1", 0.2), ("b2", 0.4)):
        tx = trade(market, b, "s1")
        rate_after_transaction(b, "s1", tx, v, market)
    tx = trade(market, "s1", "b3")
    rate_after_transaction("s1", "b3", tx, 1.0, market)
    before = {v: trust_opinion(v, "s1", None, market, P, W) for v in ("b1", "b2", "b3", "s2")}
    register_with_rebirth_check(full_creds("s1-new", gov="ID-s1"), policy, market, principal_id="s1b")
    for viewer, op in before.items():
        after = trust_opinion(viewer, "s1b", None, market, P, W)
        assert after.score == op.score
        assert after.direct == op.direct and after.recommended == op.recommended
    with pytest.raises(SelfOpinion):
        trust_opinion("s1", "s1b", None, market, P, W)
    # the reborn id may still rate on the old id's transactions
    rate_after_transaction("s1b", "b3", tx, 0.5, market)
    assert market.latest_rating("s1", "b3").value == 0.5


def test_fresh_identity_is_cold_start(market, policy):
    tx = trade(market, "b1", "s1")
    rate_after_transaction("b1", "s1", tx, 0.0, market)
    register_with_rebirth_check(full_creds("s1", gov="ID-other"), policy, market, principal_id="s1b")
    op = trust_opinion("b1", "s1b", None, market, P, W)
    assert op.score == op.verification
