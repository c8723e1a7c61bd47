import hashlib
import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from integrated_trust import Credential, DisclosureViolation, InvalidConfig, TierPolicy
from integrated_trust.policy import identity_fingerprint, validate_disclosure_request, verify_credentials

from conftest import full_creds


def test_policy_weight_sum_enforced():
    with pytest.raises(InvalidConfig):
        TierPolicy("t", (("a", 0.5), ("b", 0.4)))


def test_policy_strong_must_be_required():
    with pytest.raises(InvalidConfig):
        TierPolicy("t", (("a", 1.0),), frozenset({"b"}))


def test_policy_duplicate_names():
    with pytest.raises(InvalidConfig):
        TierPolicy("t", (("a", 0.5), ("a", 0.5)))


def test_disclosure_equal_and_empty(policy):
    validate_disclosure_request(["email", "payment", "gov_id"], policy)
    validate_disclosure_request([], policy)


def test_disclosure_extra_named():
    pol = TierPolicy("basic", (("email", 0.5), ("payment", 0.5)))
    with pytest.raises(DisclosureViolation) as exc:
        validate_disclosure_request(["email", "payment", "mother_maiden_name"], pol)
    assert exc.value.extra == ["mother_maiden_name"]


def test_disclosure_monotone(policy):
    request = ["email", "gov_id"]
    validate_disclosure_request(request, policy)
    for k in range(len(request) + 1):
        for subset in itertools.combinations(request, k):
            validate_disclosure_request(subset, policy)


def test_score_zero_all_and_partial():
    pol = TierPolicy("t", (("email", 0.2), ("payment", 0.3), ("gov_id", 0.5)), frozenset({"gov_id"}))
    none = verify_credentials(full_creds("x", verified=()), pol)
    assert none.score == 0.0 and none.fingerprint is None
    assert verify_credentials(full_creds("x"), pol).score == 1.0
    # hand sum 0.2 + 0.3
    assert verify_credentials(full_creds("x", verified=("email", "payment")), pol).score == pytest.approx(0.5, abs=1e-15)


def test_score_ignores_outside_attributes(policy):
    creds = dict(full_creds("x"))
    creds["shoe_size"] = Credential("42", True)
    assert verify_credentials(creds, policy).score == 1.0


ATTRS = ["email", "payment", "gov_id"]


@given(st.sets(st.sampled_from(ATTRS)), st.sampled_from(ATTRS))
def test_score_monotone(verified, extra):
    pol = TierPolicy("t", (("email", 0.2), ("payment", 0.3), ("gov_id", 0.5)), frozenset({"gov_id"}))
    base = verify_credentials(full_creds("x", verified=tuple(verified)), pol).score
    more = verify_credentials(full_creds("x", verified=tuple(verified | {extra})), pol).score
    assert 0.0 <= base <= more <= 1.0


def test_fingerprint_gated_on_strong(policy):
    assert identity_fingerprint(full_creds("x", verified=("email", "payment")), policy) is None


def test_fingerprint_only_strong_attrs(policy):
    a = full_creds("alice", gov="AB-123")
    b = full_creds("alice-the-second", gov="AB-123")
    assert identity_fingerprint(a, policy) == identity_fingerprint(b, policy)


def test_fingerprint_frozen_digest(policy):
    # digest of b"gov_id=ab-123\n" from coreutils sha256sum
    creds = full_creds("x", gov="  AB-123 ")
    assert identity_fingerprint(creds, policy) == "882e3eecf153774500efda5857ed34bcd2f86863dc58153da3220733ae602f6e"


def test_fingerprint_two_strong_sorted():
    pol = TierPolicy("t", (("gov_id", 0.5), ("email", 0.5)), frozenset({"gov_id", "email"}))
    creds = {"gov_id": Credential("AB-123", True), "email": Credential("Bob@Example.com", True)}
    # digest of b"email=bob@example.com\ngov_id=ab-123\n" from coreutils sha256sum
    assert identity_fingerprint(creds, pol) == "ea089c5e66e352cdeceecd685de189b784efc760a50abaa2c2ebe62e234a98f5"
    reordered = dict(reversed(list(creds.items())))
    assert identity_fingerprint(reordered, pol) == identity_fingerprint(creds, pol)


@given(st.permutations(ATTRS))
def test_fingerprint_insertion_order_irrelevant(order):
    pol = TierPolicy("t", (("email", 0.2), ("payment", 0.3), ("gov_id", 0.5)), frozenset({"gov_id", "email"}))
    creds = full_creds("z")
    shuffled = {k: creds[k] for k in order}
    assert identity_fingerprint(shuffled, pol) == identity_fingerprint(creds, pol)
    assert identity_fingerprint(creds, pol) == hashlib.sha256(b"email=z@example.com\ngov_id=id-z\n").hexdigest()
