"""
The analysis API end to end, without a socket
=============================================

Builds the same app `factorlens serve` hosts and walks the four view payloads
with an in-process client: cluster coordinates arrive through the async job
flow, then correlations, a portfolio overview, and its full-lifespan holdings.
"""
import time

from fastapi.testclient import TestClient

import factorlens as fl
from factorlens.embedding import EmbedConfig
from factorlens.factors import estimate_panel_factor_returns
from factorlens.portfolios import build_benchmarks
from factorlens.service import AnalysisSession, create_app

archetypes = (
    (0.8, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 0, -0.8, 0, 0, 0, 0, 0, 0.6, 0),
    (0, 0.6, 0.6, 0, 0, 0, 0, -0.6, 0, 0),
)
cfg = fl.SyntheticConfig(
    n_stocks=100, n_days=60, n_portfolios=20, n_archetypes=3,
    archetype_exposures=archetypes, residual_vol=0.004, seed=9,
    span_range=(25, 60), trade_events=(1, 4),
)
panel, portfolios, _ = fl.generate_synthetic_market(cfg)
portfolios = fl.attach_derived_fields(portfolios, panel)

session = AnalysisSession(
    panel=panel,
    portfolios=portfolios,
    benchmarks=build_benchmarks(panel),
    factor_returns=estimate_panel_factor_returns(panel),
    embed_cfg=EmbedConfig(epochs=5, seed=1, perplexity=5.0, tsne_iterations=400, hidden=8),
)
client = TestClient(create_app(session))

# 1. Cluster view: first hit is a 202 + job while the embedding computes.
r = client.get("/api/clusters")
print("clusters, cold cache:", r.status_code)
if r.status_code == 202:
    job_id = r.json()["job_id"]
    while True:
        job = client.get(f"/api/jobs/{job_id}").json()
        print(f"  job {job_id}: {job['state']} {job['progress']:.0%}")
        if job["state"] in ("done", "failed"):
            break
        time.sleep(0.5)
    r = client.get("/api/clusters")
body = r.json()
print(f"clusters, warm: {r.status_code}; {len(body['points'])} portfolios + "
      f"{len(body['benchmarks'])} benchmarks, timeline {len(body['timeline'])} days")

# 2. Correlation view payload.
corr = client.get("/api/correlations").json()
print(f"correlations: 10x10 matrix, {len(corr['rolling'])} rolling pairs, "
      f"{len(corr['cumulative_factor_returns'])} accumulated-return series")

# 3. Overview of the best performer in the window.
best = max(body["points"], key=lambda p: p["cumulative_return"])
overview = client.get(f"/api/portfolios/{best['id']}/overview").json()
print(f"overview of {best['id']} ({best['cumulative_return']:+.2%}): "
      f"{len(overview['signature'])} signature days, bands {overview['sectors']['bands']}")

# 4. Its holdings over the entire lifespan.
holdings = client.get(f"/api/portfolios/{best['id']}/holdings").json()
print(f"holdings: {len(holdings['per_day'])} days, duration classes "
      f"{holdings['legend']['counts']}, w_max {holdings['groups_meta']['w_max']:.3f}")
