"""Acceptance suite: each criterion asserts its stated tolerance and prints
one PASS/FAIL line (run with -s to see them live)."""
import hashlib
import json
import os
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

import factorlens as fl
from factorlens.catalog import RECORD_DIM
from factorlens.embedding import (
    EmbedConfig,
    SequenceBatch,
    conditional_probabilities,
    embed_pipeline,
    encode_batches,
    loss_and_grads,
    make_batches,
    project_tsne,
    train_autoencoder,
)
from factorlens.embedding.autoencoder import batch_loss, init_tensors
from factorlens.factors import estimate_panel_factor_returns
from factorlens.portfolios import build_benchmarks
from factorlens.service import AnalysisSession, create_app

from conftest import ARCHETYPES, nearest_centroid_purity

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


def report(criterion: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def _generate(residual_vol, seed=29, n_portfolios=3, n_days=250, n_stocks=300,
              span_range=None, **kw):
    cfg = fl.SyntheticConfig(
        n_stocks=n_stocks, n_days=n_days, n_portfolios=n_portfolios, n_archetypes=3,
        archetype_exposures=ARCHETYPES, residual_vol=residual_vol, seed=seed,
        span_range=span_range or (20, min(250, n_days)), **kw,
    )
    return fl.generate_synthetic_market(cfg)


# ---------------------------------------------------------------------------
# 1. Factor-return recovery
# ---------------------------------------------------------------------------

def test_c01_factor_return_recovery():
    started = time.perf_counter()
    panel, _, truth = _generate(residual_vol=0.0)
    frm = estimate_panel_factor_returns(panel)
    exact_err = np.abs(frm.f - truth.factor_returns).max()

    panel_n, _, truth_n = _generate(residual_vol=0.01, seed=31)
    frm_n = estimate_panel_factor_returns(panel_n)
    noisy_err = np.abs(frm_n.f - truth_n.factor_returns).mean()
    bound = 3.0 * (0.01 / np.sqrt(300))
    elapsed = time.perf_counter() - started

    ok = exact_err < 1e-8 and noisy_err < bound and elapsed < 30.0
    report("factor-return recovery", ok,
           f"exact max err {exact_err:.2e} (<1e-8), noisy mean err {noisy_err:.2e} "
           f"(<{bound:.2e}), runtime {elapsed:.1f}s (<30s)")


# ---------------------------------------------------------------------------
# 2. Standardization property
# ---------------------------------------------------------------------------

def test_c02_standardization_property():
    panel, _, _ = _generate(residual_vol=0.0)
    worst_mean = 0.0
    for t in range(panel.n_days):
        w = panel.value_weights(t)
        worst_mean = max(worst_mean, float(np.abs(w @ panel.std_exposure[t]).max()))
    market, _ = build_benchmarks(panel)
    worst_expo = float(np.abs(market.record[:, :10]).max())
    ok = worst_mean < 1e-9 and worst_expo < 1e-6
    report("standardization property", ok,
           f"value-weighted mean max {worst_mean:.2e} (<1e-9), "
           f"benchmark exposure max {worst_expo:.2e} (<1e-6)")


# ---------------------------------------------------------------------------
# 3. Correlation oracle
# ---------------------------------------------------------------------------

def _pearson(a, b):
    ca, cb = a - a.mean(), b - b.mean()
    return float((ca * cb).sum() / np.sqrt((ca * ca).sum() * (cb * cb).sum()))


def test_c03_correlation_oracle():
    rng = np.random.default_rng(41)
    worst = 0.0
    boundary_ok = True
    for _ in range(100):
        n = int(rng.integers(30, 200))
        a = rng.normal(0, 1, n)
        b = 0.4 * a + rng.normal(0, 1, n)
        rolled = fl.rolling_correlation(a, b, window=20)
        defined = ~np.isnan(rolled)
        boundary_ok &= defined.sum() == max(0, n - 40)
        boundary_ok &= np.isnan(rolled).sum() == n - max(0, n - 40)
        for i in np.flatnonzero(defined):
            worst = max(worst, abs(rolled[i] - _pearson(a[i - 20:i + 21], b[i - 20:i + 21])))
        if n >= 3:
            f = np.zeros((n, 10))
            f[:, 0], f[:, 1] = a, b
            for s in range(2, 10):
                f[:, s] = rng.normal(0, 1, n)
            from test_analytics import _frm
            frm = _frm(f)
            rho = fl.period_correlation_matrix(frm, frm.days[0], frm.days[-1])
            worst = max(worst, abs(rho[0, 1] - _pearson(a, b)))
    ok = worst < 1e-12 and boundary_ok
    report("correlation oracle", ok,
           f"max |engine - brute force| {worst:.2e} (<1e-12), "
           f"undefined-window counts exact: {boundary_ok}")


# ---------------------------------------------------------------------------
# 4. Cumulative-return oracle
# ---------------------------------------------------------------------------

def test_c04_cumulative_return_oracle():
    rng = np.random.default_rng(43)
    worst = 0.0
    concat_worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 80))
        r = rng.uniform(-0.3, 0.35, n)
        engine = fl.cumulative_return(r)
        direct = np.array([np.prod(1.0 + r[:i + 1]) - 1.0 for i in range(n)])
        worst = max(worst, float(np.abs(engine - direct).max()))
        cut = int(rng.integers(1, n))
        ra = fl.cumulative_return(r[:cut])[-1]
        rb = fl.cumulative_return(r[cut:])[-1]
        concat_worst = max(concat_worst, abs(engine[-1] - ((1 + ra) * (1 + rb) - 1)))
    ok = worst < 1e-12 and concat_worst < 1e-12
    report("cumulative-return oracle", ok,
           f"max path err {worst:.2e}, max concat err {concat_worst:.2e} (<1e-12)")


# ---------------------------------------------------------------------------
# 5. Autoencoder gradient check
# ---------------------------------------------------------------------------

def test_c05_gradient_check():
    rng = np.random.default_rng(47)
    lengths = np.array([5, 3, 4])
    mask = np.arange(5)[None, :] < lengths[:, None]
    data = rng.normal(0, 1, (3, 5, RECORD_DIM)) * mask[:, :, None]
    batch = SequenceBatch(ids=("a", "b", "c"), data=data, mask=mask, lengths=lengths)
    tensors = init_tensors(53, RECORD_DIM, 2)
    _, grads = loss_and_grads(tensors, batch)
    eps = 1e-5
    worst_block, worst = "", 0.0
    for name, g in grads.items():
        fd = np.zeros_like(g)
        for idx in np.ndindex(g.shape):
            probe = {k: v.copy() for k, v in tensors.items()}
            probe[name][idx] += eps
            up = batch_loss(probe, batch)
            probe[name][idx] -= 2 * eps
            down = batch_loss(probe, batch)
            fd[idx] = (up - down) / (2 * eps)
        rel = float(np.linalg.norm(fd - g) / max(np.linalg.norm(fd), np.linalg.norm(g)))
        if rel > worst:
            worst_block, worst = name, rel
    ok = worst < 1e-4
    report("autoencoder gradient check", ok,
           f"worst block {worst_block} rel err {worst:.2e} (<1e-4) across {len(grads)} blocks")


# ---------------------------------------------------------------------------
# 6. Masking invariance
# ---------------------------------------------------------------------------

def test_c06_masking_invariance():
    rng = np.random.default_rng(59)
    train_batch_data = rng.normal(0, 1, (6, 20, RECORD_DIM))
    lengths = rng.integers(8, 21, 6)
    mask = np.arange(20)[None, :] < lengths[:, None]
    batch = SequenceBatch(ids=tuple(f"t{i}" for i in range(6)),
                          data=train_batch_data * mask[:, :, None],
                          mask=mask, lengths=lengths)
    params = train_autoencoder([batch], epochs=2, lr=1e-3, seed=61, hidden=8)

    worst = 0.0
    for b in range(50):
        n = int(rng.integers(2, 12))
        T = int(rng.integers(25, 60))
        lens = rng.integers(20, T + 1, n)
        m = np.arange(T)[None, :] < lens[:, None]
        clean = rng.normal(0, 1, (n, T, RECORD_DIM)) * m[:, :, None]
        ids = tuple(f"b{b}_{i}" for i in range(n))
        base = encode_batches(
            [SequenceBatch(ids=ids, data=clean, mask=m, lengths=lens)], params)
        noisy = clean + rng.normal(0, 100, clean.shape) * (~m[:, :, None])
        fuzzed = SequenceBatch.__new__(SequenceBatch)
        for name, val in (("ids", ids), ("data", noisy), ("mask", m), ("lengths", lens)):
            object.__setattr__(fuzzed, name, val)
        out = encode_batches([fuzzed], params)
        for pid in ids:
            worst = max(worst, float(np.abs(out[pid] - base[pid]).max()))
    ok = worst <= 1e-10
    report("masking invariance", ok, f"max latent shift over 50 fuzzed batches {worst:.2e} (<=1e-10)")


# ---------------------------------------------------------------------------
# 7 + 8. Embedding separability and t-SNE internals
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def separability_runs():
    cfg = fl.SyntheticConfig(
        n_stocks=300, n_days=120, n_portfolios=200, n_archetypes=3,
        archetype_exposures=ARCHETYPES, residual_vol=0.005, seed=67,
        span_range=(40, 120),
    )
    panel, portfolios, truth = fl.generate_synthetic_market(cfg)
    portfolios = fl.attach_derived_fields(portfolios, panel)
    labels = np.array([truth.archetype_of[p.id] for p in portfolios])
    period = (panel.trading_days[0], panel.trading_days[-1])
    batches, _ = make_batches(portfolios, period)
    runs = []
    for seed in range(5):
        t0 = time.perf_counter()
        params = train_autoencoder(batches, epochs=30, lr=1e-3, seed=seed)
        train_seconds = time.perf_counter() - t0
        latents = encode_batches(batches, params)
        ids = [p.id for p in portfolios]
        H = np.array([latents[i] for i in ids])
        tsne = project_tsne(H, perplexity=30.0, seed=seed, iterations=1000)
        runs.append({
            "seed": seed, "H": H, "labels": labels, "tsne": tsne,
            "train_seconds": train_seconds,
        })
    return runs


def test_c07_embedding_separability(separability_runs):
    from sklearn.metrics import silhouette_score
    good = 0
    details = []
    slowest = 0.0
    for run in separability_runs:
        purity = nearest_centroid_purity(run["H"], run["labels"])
        silhouette = float(silhouette_score(run["tsne"].coords, run["labels"]))
        slowest = max(slowest, run["train_seconds"])
        hit = purity >= 0.9 and silhouette >= 0.3
        good += hit
        details.append(f"seed {run['seed']}: purity {purity:.3f} silhouette {silhouette:.3f}"
                       f" {'ok' if hit else 'MISS'}")
    ok = good >= 4 and slowest <= 900.0
    report("embedding separability", ok,
           f"{good}/5 seeds pass (need >=4); slowest training {slowest:.0f}s (<=900s); "
           + "; ".join(details))


def test_c08_tsne_internals(separability_runs):
    run = separability_runs[0]
    P, _ = conditional_probabilities(run["H"], 30.0)
    row_sum_err = float(np.abs(P.sum(axis=1) - 1.0).max())
    perp_err = 0.0
    for i in range(P.shape[0]):
        p = P[i][P[i] > 0]
        perp_err = max(perp_err, abs(float(np.exp(-(p * np.log(p)).sum())) - 30.0))
    diffs = np.diff(run["tsne"].kl_history[500:])
    frac = float((diffs <= 0).mean())
    ok = row_sum_err < 1e-8 and perp_err < 1e-3 and frac >= 0.95
    report("t-SNE internals", ok,
           f"row-sum err {row_sum_err:.2e} (<1e-8), perplexity err {perp_err:.2e} (<1e-3), "
           f"non-increasing KL fraction {frac:.3f} (>=0.95)")


# ---------------------------------------------------------------------------
# 9. Pipeline timing
# ---------------------------------------------------------------------------

def test_c09_brushed_pipeline_timing():
    # spans of 120+ days guarantee every portfolio overlaps the brush by >= 20
    panel, portfolios, _ = _generate(residual_vol=0.005, seed=71, n_portfolios=500,
                                     span_range=(120, 250))
    portfolios = fl.attach_derived_fields(portfolios, panel)
    benchmarks = list(build_benchmarks(panel))
    frm = estimate_panel_factor_returns(panel)
    period_full = (panel.trading_days[0], panel.trading_days[-1])
    cfg = EmbedConfig(epochs=2, seed=73, perplexity=30.0, tsne_iterations=1000)
    batches, _ = make_batches(portfolios, period_full)
    params = train_autoencoder(batches, epochs=cfg.epochs, lr=cfg.lr, seed=cfg.seed)

    brushed = (panel.trading_days[40], panel.trading_days[200])
    started = time.perf_counter()
    result, _ = embed_pipeline(portfolios + benchmarks, brushed, cfg, params=params)
    fl.build_correlation_surface(frm, brushed[0], brushed[1])
    elapsed = time.perf_counter() - started
    ok = elapsed < 60.0 and len(result.ids) >= 500
    report("brushed pipeline timing", ok,
           f"{len(result.ids)} series re-embedded + correlations in {elapsed:.1f}s (<60s)")


# ---------------------------------------------------------------------------
# 10. API contract golden files
# ---------------------------------------------------------------------------

def _fixture_app():
    cfg = fl.SyntheticConfig(
        n_stocks=80, n_days=50, n_portfolios=20, n_archetypes=3,
        archetype_exposures=((0.8, 0, 0, 0, 0, 0, 0, 0, 0, 0),
                             (0, 0, -0.8, 0, 0, 0, 0, 0, 0.6, 0),
                             (0, 0.6, 0.6, 0, 0, 0, 0, -0.6, 0, 0)),
        residual_vol=0.003, seed=83, span_range=(25, 50), trade_events=(1, 3),
    )
    panel, portfolios, _ = fl.generate_synthetic_market(cfg)
    portfolios = fl.attach_derived_fields(portfolios, panel)
    session = AnalysisSession(
        panel=panel, portfolios=portfolios, benchmarks=build_benchmarks(panel),
        factor_returns=estimate_panel_factor_returns(panel),
        embed_cfg=EmbedConfig(epochs=3, seed=89, perplexity=5.0,
                              tsne_iterations=300, hidden=6),
    )
    return TestClient(create_app(session)), portfolios


def _collect_bodies():
    client, portfolios = _fixture_app()
    pid = portfolios[0].id
    bodies = {}
    r = client.get("/api/clusters?start=2016-01-11&end=2016-03-05")
    if r.status_code == 202:
        job_id = r.json()["job_id"]
        deadline = time.time() + 300
        while time.time() < deadline:
            job = client.get(f"/api/jobs/{job_id}").json()
            if job["state"] in ("done", "failed"):
                break
            time.sleep(0.1)
        assert job["state"] == "done", job
        bodies["jobs.json"] = client.get(f"/api/jobs/{job_id}").content
        r = client.get("/api/clusters?start=2016-01-11&end=2016-03-05")
    assert r.status_code == 200
    bodies["clusters.json"] = r.content
    for name, path in (
        ("correlations.json", "/api/correlations?start=2016-01-11&end=2016-03-05"),
        ("overview.json", f"/api/portfolios/{pid}/overview?start=2016-01-11&end=2016-03-05"),
        ("holdings.json", f"/api/portfolios/{pid}/holdings"),
    ):
        resp = client.get(path)
        assert resp.status_code == 200, (name, resp.status_code)
        bodies[name] = resp.content
    assert "jobs.json" in bodies  # cold cache must have gone through the job path
    return bodies


def test_c10_api_contract_golden():
    first = _collect_bodies()
    second = _collect_bodies()  # fresh session, fresh caches
    run_identical = all(first[k] == second[k] for k in first)

    os.makedirs(GOLDEN_DIR, exist_ok=True)
    update = os.environ.get("UPDATE_GOLDEN") == "1"
    golden_ok = True
    mismatches = []
    for name, body in first.items():
        path = os.path.join(GOLDEN_DIR, name)
        if update or not os.path.exists(path):
            with open(path, "wb") as fh:
                fh.write(body)
        else:
            expected = open(path, "rb").read()
            if expected != body:
                golden_ok = False
                mismatches.append(name)
    ok = run_identical and golden_ok
    report("API contract golden files", ok,
           f"five endpoints byte-identical across fresh runs: {run_identical}; "
           f"golden match: {golden_ok}{' (' + ','.join(mismatches) + ')' if mismatches else ''}")
