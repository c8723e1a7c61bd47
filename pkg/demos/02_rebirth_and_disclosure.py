"""
Re-registration and minimal disclosure
======================================

A seller with a bad record tries to come back under a fresh id. Because the
verified government id hashes to the same fingerprint, the new id lands on
the old identity record and inherits its ratings.
"""

from integrated_trust import (
    Credential,
    DisclosureViolation,
    Repository,
    TierPolicy,
    TrustEngine,
    EngineParams,
    rate_after_transaction,
    register_with_rebirth_check,
    validate_disclosure_request,
)

policy = TierPolicy.from_dict(
    "standard",
    {"required": {"email": 0.2, "payment": 0.3, "gov_id": 0.5}, "strong": ["gov_id"]},
)
repo = Repository()


def creds(email, gov):
    return {
        "email": Credential(email, True),
        "payment": Credential("card-" + email, True),
        "gov_id": Credential(gov, True),
    }


register_with_rebirth_check(creds("buyer@example.org", "B-1"), policy, repo, principal_id="buyer")
register_with_rebirth_check(creds("old@shop.example", "S-9"), policy, repo, principal_id="old-shop")
repo.add_transaction("t1", "buyer", "old-shop", "300", "books", 2, 12)
rate_after_transaction("buyer", "old-shop", "t1", 0.05, repo)

# Same person, new email, same id document (case and spacing ignored).
reg = register_with_rebirth_check(creds("fresh@shop.example", " s-9 "), policy, repo, principal_id="new-shop")
print("linked to existing record:", reg.linked, "record:", reg.record_id)

engine = TrustEngine(repo, EngineParams(tiers={"standard": policy}))
print("buyer -> new-shop:", engine.opinion("buyer", "new-shop").score)

# A registration form may only ask for what the tier requires.
try:
    validate_disclosure_request(["email", "gov_id", "date_of_birth"], policy)
except DisclosureViolation as exc:
    print("refused request:", exc.to_dict())
