"""Endpoint contracts over a small synthetic session."""
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

import factorlens as fl
from factorlens.embedding import EmbedConfig
from factorlens.factors import estimate_panel_factor_returns
from factorlens.portfolios import build_benchmarks
from factorlens.service import AnalysisSession, ServiceConfig, create_app
from factorlens.service.app import duration_class, weight_group

from conftest import make_market


@pytest.fixture(scope="module")
def client(small_market):
    panel, portfolios, _ = small_market
    session = AnalysisSession(
        panel=panel, portfolios=portfolios, benchmarks=build_benchmarks(panel),
        factor_returns=estimate_panel_factor_returns(panel),
        embed_cfg=EmbedConfig(epochs=3, seed=4, perplexity=5.0,
                              tsne_iterations=250, hidden=6),
    )
    return TestClient(create_app(session))


def _wait_for_job(client, job_id, timeout=180.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        body = client.get(f"/api/jobs/{job_id}").json()
        if body["state"] in ("done", "failed"):
            return body
        assert 0.0 <= body["progress"] <= 1.0
        time.sleep(0.1)
    raise AssertionError("job did not finish")


def _warm_clusters(client, query=""):
    r = client.get(f"/api/clusters{query}")
    if r.status_code == 202:
        job = _wait_for_job(client, r.json()["job_id"])
        assert job["state"] == "done", job
        assert job["result"]["kind"] == "clusters"
        r = client.get(f"/api/clusters{query}")
    assert r.status_code == 200
    return r


# ---------------------------------------------------------------------------
# clusters
# ---------------------------------------------------------------------------

def test_clusters_cardinality_and_cache(client, small_market):
    _, portfolios, _ = small_market
    r = _warm_clusters(client)
    body = r.json()
    assert len(body["points"]) == len(portfolios)
    assert {b["id"] for b in body["benchmarks"]} == {"CSI300", "CSI500"}
    assert len(body["timeline"]) == 60
    repeat = client.get("/api/clusters")
    assert repeat.status_code == 200 and repeat.content == r.content


def test_clusters_rejects_inverted_period(client):
    r = client.get("/api/clusters?start=2016-03-01&end=2016-01-05")
    assert r.status_code == 400 and r.json()["error"] == "invalid-period"


def test_clusters_rejects_garbage_dates(client):
    assert client.get("/api/clusters?start=notadate").status_code == 400


def test_clusters_404_when_nothing_qualifies(client, small_market):
    panel, _, _ = small_market
    # last 5 trading days: every portfolio overlap is < 20 days
    start = panel.trading_days[-5].isoformat()
    r = client.get(f"/api/clusters?start={start}")
    assert r.status_code == 404 and r.json()["error"] == "no-qualifying-portfolios"


def test_cluster_returns_match_offline_compounding(client, small_market):
    panel, portfolios, _ = small_market
    body = _warm_clusters(client).json()
    by_id = {p["id"]: p for p in body["points"]}
    for p in portfolios[:5]:
        expected = float(np.prod(1.0 + p.daily_return[1:]) - 1.0)
        assert by_id[p.id]["cumulative_return"] == pytest.approx(expected, abs=1e-12)


# ---------------------------------------------------------------------------
# correlations
# ---------------------------------------------------------------------------

def test_correlations_shape_and_brute_force(client, small_market):
    panel, _, _ = small_market
    r = client.get("/api/correlations")
    assert r.status_code == 200
    body = r.json()
    assert len(body["period_matrix"]) == 10
    assert len(body["rolling"]) == 45
    frm = estimate_panel_factor_returns(panel)
    f = frm.f
    for (j, k) in ((0, 1), (3, 7)):
        a, b = f[:, j], f[:, k]
        ca, cb = a - a.mean(), b - b.mean()
        expected = float((ca * cb).sum() / np.sqrt((ca * ca).sum() * (cb * cb).sum()))
        assert body["period_matrix"][j][k] == pytest.approx(expected, abs=1e-9)
    for name, series in body["cumulative_factor_returns"].items():
        assert series[0]["value"] == 0.0
        assert len(series) == panel.n_days


def test_correlations_one_day_period_rejected(client, small_market):
    panel, _, _ = small_market
    day = panel.trading_days[10].isoformat()
    r = client.get(f"/api/correlations?start={day}&end={day}")
    assert r.status_code == 400


# ---------------------------------------------------------------------------
# overview
# ---------------------------------------------------------------------------

def test_overview_bands_and_signature(client, small_market):
    panel, portfolios, _ = small_market
    p = portfolios[0]
    r = client.get(f"/api/portfolios/{p.id}/overview")
    assert r.status_code == 200
    body = r.json()
    assert len(body["signature"]) == p.span
    assert len(body["sectors"]["bands"]) == 7
    assert body["sectors"]["bands"][0] == "cash" and body["sectors"]["bands"][-1] == "rest"
    for day in body["sectors"]["series"]:
        assert sum(day["values"]) == pytest.approx(1.0, abs=1e-9)
    # top-5 equals offline ranking of period-average sector weights
    mean_w = p.record[:, 10:38].mean(axis=0)
    expected = [panel.catalog.sector_names[s]
                for s in sorted(range(28), key=lambda s: (-mean_w[s], s))[:5]]
    assert body["sectors"]["bands"][1:6] == expected


def test_overview_unknown_and_no_overlap(client, small_market):
    panel, portfolios, _ = small_market
    assert client.get("/api/portfolios/nope/overview").status_code == 404
    p = portfolios[0]
    outside = [d for d in panel.trading_days if d < p.days[0] or d > p.days[-1]]
    if outside:
        day = outside[0].isoformat()
        r = client.get(f"/api/portfolios/{p.id}/overview?start={day}&end={day}")
        assert r.status_code == 400 and r.json()["error"] == "no-overlap"


def test_overview_signature_matches_records(client, small_market):
    _, portfolios, _ = small_market
    p = portfolios[3]
    body = client.get(f"/api/portfolios/{p.id}/overview").json()
    got = np.array([row["exposures"] for row in body["signature"]])
    np.testing.assert_array_equal(got, p.record[:, :10])


# ---------------------------------------------------------------------------
# holdings
# ---------------------------------------------------------------------------

def test_holdings_full_lifespan_and_groups(client, small_market):
    panel, portfolios, _ = small_market
    p = portfolios[1]
    r = client.get(f"/api/portfolios/{p.id}/holdings")
    assert r.status_code == 200
    body = r.json()
    assert len(body["per_day"]) == p.span
    w_max = body["groups_meta"]["w_max"]
    assert body["groups_meta"]["boundaries"] == pytest.approx(
        [w_max / 5 * k for k in range(1, 5)])
    seen_weights = []
    for day in body["per_day"]:
        for pos in day["positions"]:
            assert 0 <= pos["group"] <= 4
            assert pos["group"] == weight_group(pos["weight"], w_max)
            seen_weights.append(pos["weight"])
        assert 0.0 <= day["invested"] <= 1.0
    assert max(seen_weights) == pytest.approx(w_max)


def test_holdings_legend_counts_match_classes(client, small_market):
    _, portfolios, _ = small_market
    p = portfolios[2]
    body = client.get(f"/api/portfolios/{p.id}/holdings").json()
    classes = body["legend"]["classes"]
    counts = body["legend"]["counts"]
    assert sum(counts.values()) == len(classes)
    for cls in (">30%", "10-30%", "<10%"):
        assert counts[cls] == sum(1 for c in classes.values() if c == cls)


def test_weight_group_boundaries():
    # w_max = 0.25 -> boundaries at 0.05/0.10/0.15/0.20
    assert weight_group(0.049, 0.25) == 0
    assert weight_group(0.05, 0.25) == 1
    assert weight_group(0.149, 0.25) == 2
    assert weight_group(0.20, 0.25) == 4
    assert weight_group(0.25, 0.25) == 4
    groups = [weight_group(w, 0.25) for w in np.linspace(0, 0.25, 100)]
    assert groups == sorted(groups)  # monotone in weight


def test_duration_classes():
    assert duration_class(100, 100) == ">30%"
    assert duration_class(31, 100) == ">30%"
    assert duration_class(30, 100) == "10-30%"
    assert duration_class(15, 100) == "10-30%"
    assert duration_class(10, 100) == "10-30%"
    assert duration_class(9, 100) == "<10%"


# ---------------------------------------------------------------------------
# jobs and config
# ---------------------------------------------------------------------------

def test_unknown_job_is_404(client):
    assert client.get("/api/jobs/does-not-exist").status_code == 404


def test_session_from_dir_serves_clusters(small_market, tmp_path):
    # same construction path as `factorlens serve`, minus the socket
    from factorlens.market_io import write_panel, write_portfolios
    panel, portfolios, _ = small_market
    write_panel(panel, str(tmp_path))
    write_portfolios(portfolios, str(tmp_path))
    session = AnalysisSession.from_dir(
        str(tmp_path),
        embed_cfg=EmbedConfig(epochs=2, seed=1, perplexity=5.0,
                              tsne_iterations=100, hidden=4),
    )
    local = TestClient(create_app(session))
    assert _warm_clusters(local).status_code == 200


def test_retrain_mode_trains_per_period(small_market):
    panel, portfolios, _ = small_market
    session = AnalysisSession(
        panel=panel, portfolios=portfolios, benchmarks=build_benchmarks(panel),
        factor_returns=estimate_panel_factor_returns(panel),
        embed_cfg=EmbedConfig(epochs=2, seed=2, perplexity=5.0,
                              tsne_iterations=100, hidden=4, retrain=True),
    )
    local = TestClient(create_app(session))
    r = _warm_clusters(local)
    assert r.status_code == 200
    assert session.params is None  # global weights never trained in retrain mode
    assert len(session._period_params) == 1
    repeat = local.get("/api/clusters")
    assert repeat.content == r.content


def test_static_ui_mount(small_market, tmp_path):
    panel, portfolios, _ = small_market
    (tmp_path / "index.html").write_text("<!doctype html><title>ui</title>")
    session = AnalysisSession(
        panel=panel, portfolios=portfolios, benchmarks=build_benchmarks(panel),
        factor_returns=estimate_panel_factor_returns(panel),
        embed_cfg=EmbedConfig(epochs=2, seed=1, perplexity=5.0, tsne_iterations=60, hidden=4),
    )
    local = TestClient(create_app(session, static_dir=str(tmp_path)))
    r = local.get("/")
    assert r.status_code == 200 and "ui" in r.text
    assert local.get("/api/jobs/none").status_code == 404  # API still wins


def test_service_config_env_overrides(tmp_path):
    cfg_file = tmp_path / "svc.json"
    cfg_file.write_text('{"port": 9000, "data_dir": "/data"}')
    cfg = ServiceConfig.load(str(cfg_file), env={"FACTORLENS_PORT": "9100",
                                                 "FACTORLENS_SEED": "5"})
    assert cfg.port == 9100 and cfg.seed == 5 and cfg.data_dir == "/data"
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.json"
        bad.write_text('{"nonsense": 1}')
        ServiceConfig.load(str(bad))
