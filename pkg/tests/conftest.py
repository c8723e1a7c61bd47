from decimal import Decimal

import pytest

from integrated_trust import Credential, Repository, TierPolicy
from integrated_trust.integrator import register_with_rebirth_check

ACCEPTANCE_RESULTS = []


@pytest.fixture
def policy():
    return TierPolicy(
        tier="standard",
        required_attrs=(("email", 0.2), ("payment", 0.3), ("gov_id", 0.5)),
        strong_attrs=frozenset({"gov_id"}),
    )


@pytest.fixture
def repo():
    return Repository()


def full_creds(name, gov=None, verified=("email", "payment", "gov_id")):
    values = {"email": f"{name}@example.com", "payment": f"card-{name}", "gov_id": gov or f"ID-{name}"}
    return {k: Credential(v, k in verified) for k, v in values.items()}


def register(repo, policy, name, **kw):
    return register_with_rebirth_check(full_creds(name, **kw), policy, repo, principal_id=name)


def trade(repo, buyer, seller, cost="100", scope="books", promised=5, actual=5, tx_id=None):
    tx_id = tx_id or f"tx-{len(repo.state.transactions) + 1}"
    repo.add_transaction(tx_id, buyer, seller, Decimal(cost), scope, promised, actual)
    return tx_id


@pytest.fixture
def market(repo, policy):
    """Buyers b1..b3 and sellers s1, s2, all fully verified."""
    for name in ("b1", "b2", "b3", "s1", "s2"):
        register(repo, policy, name)
    return repo


@pytest.fixture
def criterion():
    """Record a named acceptance criterion outcome for the terminal summary."""

    def record(name, passed, detail=""):
        ACCEPTANCE_RESULTS.append((name, passed, detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
