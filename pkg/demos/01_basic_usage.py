"""
Registering principals and asking for a trust opinion
=====================================================

Two buyers and one seller join a marketplace, trade, and rate each other.
We then ask what the first buyer thinks of the seller.
"""

from integrated_trust import (
    Credential,
    EngineParams,
    Repository,
    TierPolicy,
    TrustEngine,
    rate_after_transaction,
    register_with_rebirth_check,
)

# A tier says which attributes must be verified and how much each counts.
# gov_id is "strong": it drives the identity fingerprint.
policy = TierPolicy.from_dict(
    "standard",
    {"required": {"email": 0.2, "payment": 0.3, "gov_id": 0.5}, "strong": ["gov_id"]},
)


def creds(name, gov_verified=True):
    return {
        "email": Credential(f"{name}@example.org", True),
        "payment": Credential(f"card-{name}", True),
        "gov_id": Credential(f"ID-{name}", gov_verified),
    }


# An in-memory repository; pass a path to keep an event log on disk.
repo = Repository()
for name in ("alice", "bob"):
    register_with_rebirth_check(creds(name), policy, repo, principal_id=name)
reg = register_with_rebirth_check(creds("shop", gov_verified=False), policy, repo, principal_id="shop")
print("shop verification score:", reg.verification.score)  # 0.5, gov_id not verified

# Costs are decimals; floats are refused so amounts never drift.
repo.add_transaction("t1", "alice", "shop", "120.00", "books", 3, 3)
repo.add_transaction("t2", "bob", "shop", "2400.00", "electronics", 5, 9)
rate_after_transaction("alice", "shop", "t1", 0.9, repo)
rate_after_transaction("bob", "shop", "t2", 0.3, repo)

engine = TrustEngine(repo, EngineParams(tiers={"standard": policy}))

# alice has her own experience, plus bob's recommendation weighted by context.
opinion = engine.opinion("alice", "shop", scope="books")
print("alice -> shop:", opinion.to_dict())

# A stranger with no history gets exactly the verification score.
register_with_rebirth_check(creds("carol"), policy, repo, principal_id="carol")
register_with_rebirth_check(creds("newshop"), policy, repo, principal_id="newshop")
print("cold start:", engine.opinion("carol", "newshop").score)
