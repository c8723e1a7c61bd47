"""
Cached (ATC) versus recomputed (DTC) opinions
=============================================

DTC recomputes every opinion. ATC keeps a cache tagged with the repository
version; with staleness 0 it is indistinguishable from DTC, and a larger
staleness trades freshness for fewer recomputations.
"""

import json
from pathlib import Path

from integrated_trust import AtcCache, QueryContext, atc_opinion, dtc_opinion
from integrated_trust.simulator import ScenarioConfig, run_scenario_repo

here = Path(__file__).parent
config = ScenarioConfig.from_dict(json.loads((here / "scenarios" / "baseline.json").read_text()))
repo, _ = run_scenario_repo(config)
params = config.engine
print("repository version:", repo.version)

viewer = "buyer-00"
tx = next(t for t in repo.state.transactions.values() if t.buyer == viewer)
subject = tx.seller
fresh = AtcCache(staleness_events=0)
q = QueryContext(None)
print("dtc:", dtc_opinion(viewer, subject, q, repo, params).score)
print("atc:", atc_opinion(viewer, subject, q, repo, fresh, params).score)
print("atc again (cache hit):", atc_opinion(viewer, subject, q, repo, fresh, params).score, fresh.hits)

# A new rating bumps the version, so the staleness-0 entry is no longer served.
repo.upsert_rating(viewer, subject, 1.0, tx.tx_id)
print("after new event, atc:", atc_opinion(viewer, subject, q, repo, fresh, params).score,
      "dtc:", dtc_opinion(viewer, subject, q, repo, params).score)

# With staleness 5 the old entry keeps being served for up to 5 more events.
lazy = AtcCache(staleness_events=5)
before = atc_opinion(viewer, subject, q, repo, lazy, params).score
repo.upsert_rating(viewer, subject, 0.5, tx.tx_id)
print("lazy atc:", atc_opinion(viewer, subject, q, repo, lazy, params).score, "(cached", before, ")",
      "dtc:", dtc_opinion(viewer, subject, q, repo, params).score)
