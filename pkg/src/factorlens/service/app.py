"""HTTP facade: the four view endpoints plus job polling.

Responses are canonical JSON (sorted keys, compact separators, repr floats),
so identical data and period produce byte-identical bodies. Long embedding
computations run as jobs: a cold cluster request returns 202 with a job id to
poll, and the warmed request returns the full payload.
"""
from __future__ import annotations

import datetime as dt
import json
import logging
import time

import numpy as np
from fastapi import FastAPI, Request, Response

from ..analytics import build_correlation_surface
from ..catalog import N_FACTORS, N_SECTORS
from ..errors import EmptyRangeError
from .jobs import JobRegistry
from .session import AnalysisSession

logger = logging.getLogger("factorlens.service")

DURATION_CLASSES = (">30%", "10-30%", "<10%")


def canonical_json(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()


def _json_response(payload, status: int = 200) -> Response:
    return Response(content=canonical_json(payload), status_code=status,
                    media_type="application/json")


def _error(status: int, code: str, detail: str) -> Response:
    return _json_response({"error": code, "detail": detail}, status)


def _parse_day(text: str | None):
    if text is None:
        return None
    return dt.date.fromisoformat(text)


def duration_class(held_days: int, lifespan: int) -> str:
    share = held_days / lifespan
    if share > 0.3:
        return ">30%"
    if share >= 0.1:
        return "10-30%"
    return "<10%"


def weight_group(weight: float, w_max: float) -> int:
    """Group index 0..4; boundaries split [0, w_max] into five equal ranges."""
    if w_max <= 0:
        return 0
    return min(4, int(weight / (w_max / 5.0)))


def create_app(session: AnalysisSession, static_dir: str | None = None) -> FastAPI:
    """API app; with static_dir set, also hosts the web UI from that directory."""
    app = FastAPI(title="factorlens", docs_url=None, redoc_url=None)
    jobs = JobRegistry(max_workers=1)
    app.state.session = session
    app.state.jobs = jobs

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        logger.info(json.dumps({
            "method": request.method,
            "path": request.url.path,
            "query": str(request.url.query),
            "status": response.status_code,
            "ms": round((time.perf_counter() - started) * 1000, 3),
        }, sort_keys=True))
        return response

    def snap_or_error(start: str | None, end: str | None):
        try:
            s, e = _parse_day(start), _parse_day(end)
        except ValueError as exc:
            return None, _error(400, "invalid-period", str(exc))
        period = session.snap_period(s, e)
        if period is None:
            return None, _error(400, "invalid-period",
                                f"no trading days inside [{start}, {end}]")
        return period, None

    # ------------------------------------------------------------------ views

    @app.get("/api/clusters")
    def clusters(start: str | None = None, end: str | None = None):
        period, err = snap_or_error(start, end)
        if err:
            return err
        qualifying = session.qualifying(period)
        if not qualifying:
            return _error(404, "no-qualifying-portfolios",
                          "no portfolio overlaps the period by >= 20 days")
        result = session.cached_embedding(period)
        if result is None:
            ref = {"kind": "clusters", "start": period[0].isoformat(),
                   "end": period[1].isoformat()}
            job = jobs.submit(
                key=f"embed:{ref['start']}:{ref['end']}",
                work=lambda cb: session.compute_embedding(period, cb),
                result_ref=ref,
            )
            return _json_response(
                {"job_id": job.id, "state": job.state, "progress": job.progress}, 202
            )

        benchmark_names = {b.name for b in session.benchmarks}
        points, benchmarks = [], []
        for i, pid in enumerate(result.ids):
            x, y = float(result.C[i, 0]), float(result.C[i, 1])
            if pid in benchmark_names:
                b = next(b for b in session.benchmarks if b.name == pid)
                series = session.window_cumulative(b.days, b.daily_return, period)
                benchmarks.append(
                    {"id": pid, "x": x, "y": y,
                     "cumulative_return": series[-1][1] if series else 0.0}
                )
            else:
                p = session.get_portfolio(pid)
                series = session.window_cumulative(p.days, p.daily_return, period)
                points.append(
                    {"id": pid, "x": x, "y": y,
                     "cumulative_return": series[-1][1] if series else 0.0}
                )
        market = session.benchmarks[0]
        i0 = market.days.index(period[0])
        i1 = market.days.index(period[1]) + 1
        timeline = [
            {"date": market.days[i].isoformat(), "market_return": float(market.daily_return[i])}
            for i in range(i0, i1)
        ]
        return _json_response({
            "period": {"start": period[0].isoformat(), "end": period[1].isoformat()},
            "points": points,
            "benchmarks": benchmarks,
            "timeline": timeline,
            "excluded": list(result.excluded),
            "tsne_kl": float(result.tsne_kl),
        })

    @app.get("/api/correlations")
    def correlations(start: str | None = None, end: str | None = None):
        period, err = snap_or_error(start, end)
        if err:
            return err
        try:
            surface = build_correlation_surface(session.factor_returns, *period)
        except EmptyRangeError as exc:
            return _error(400, "invalid-period", str(exc))

        def clean(x) -> float | None:
            return None if np.isnan(x) else float(x)

        rolling = {
            f"{j},{k}": [
                {"date": d.isoformat(), "value": clean(v)}
                for d, v in zip(surface.days, surface.rolling[j, k])
            ]
            for j in range(N_FACTORS) for k in range(j + 1, N_FACTORS)
        }
        frm = session.factor_returns
        i0 = frm.day_index(period[0])
        i1 = frm.day_index(period[1]) + 1
        cumulative = {}
        for s, name in enumerate(session.panel.catalog.style_factors):
            acc, series = 1.0, [{"date": frm.days[i0].isoformat(), "value": 0.0}]
            for i in range(i0 + 1, i1):
                acc *= 1.0 + float(frm.f[i, s])
                series.append({"date": frm.days[i].isoformat(), "value": acc - 1.0})
            cumulative[name] = series
        return _json_response({
            "period": {"start": period[0].isoformat(), "end": period[1].isoformat()},
            "window": surface.window,
            "factors": list(session.panel.catalog.style_factors),
            "period_matrix": [[clean(v) for v in row] for row in surface.period],
            "rolling": rolling,
            "cumulative_factor_returns": cumulative,
        })

    @app.get("/api/portfolios/{pid}/overview")
    def overview(pid: str, start: str | None = None, end: str | None = None):
        p = session.get_portfolio(pid)
        if p is None:
            return _error(404, "unknown-id", f"no portfolio {pid!r}")
        period, err = snap_or_error(start, end)
        if err:
            return err
        idx = [t for t, d in enumerate(p.days) if period[0] <= d <= period[1]]
        if not idx:
            return _error(400, "no-overlap",
                          f"portfolio {pid} does not overlap [{period[0]}, {period[1]}]")
        signature = [
            {"date": p.days[t].isoformat(), "exposures": [float(v) for v in p.record[t, :N_FACTORS]]}
            for t in idx
        ]
        sector_block = p.record[idx, N_FACTORS:N_FACTORS + N_SECTORS]
        mean_weights = sector_block.mean(axis=0)
        order = sorted(range(N_SECTORS), key=lambda s: (-mean_weights[s], s))
        top5 = order[:5]
        names = session.panel.catalog.sector_names
        bands = ["cash"] + [names[s] for s in top5] + ["rest"]
        rest = [s for s in range(N_SECTORS) if s not in top5]
        series = []
        for row, t in enumerate(idx):
            cash_frac = float(p.record[t, -1])
            values = [cash_frac] + [float(sector_block[row, s]) for s in top5]
            values.append(float(sector_block[row, rest].sum()))
            series.append({"date": p.days[t].isoformat(), "values": values})
        cumulative = [
            {"date": d.isoformat(), "value": float(v)}
            for d, v in session.window_cumulative(p.days, p.daily_return, period)
        ]
        return _json_response({
            "id": pid,
            "period": {"start": period[0].isoformat(), "end": period[1].isoformat()},
            "signature": signature,
            "sectors": {"bands": bands, "series": series},
            "cumulative_return": cumulative,
        })

    @app.get("/api/portfolios/{pid}/holdings")
    def holdings(pid: str):
        p = session.get_portfolio(pid)
        if p is None:
            return _error(404, "unknown-id", f"no portfolio {pid!r}")
        panel = session.panel
        t0 = panel.day_index(p.days[0])
        cols = [panel.stock_index(s) for s in p.stock_ids]
        prices = panel.price[t0:t0 + p.span, cols]
        values = p.shares * prices
        total = values.sum(axis=1) + p.cash
        weights = values / total[:, None]
        w_max = float(weights.max()) if weights.size else 0.0

        per_day = []
        for t in range(p.span):
            positions = [
                {
                    "stock_id": p.stock_ids[k],
                    "weight": float(weights[t, k]),
                    "group": weight_group(float(weights[t, k]), w_max),
                }
                for k in range(len(cols)) if p.shares[t, k] > 0
            ]
            positions.sort(key=lambda e: e["stock_id"])
            per_day.append({
                "date": p.days[t].isoformat(),
                "invested": float(1.0 - p.cash[t] / total[t]),
                "positions": positions,
            })

        held_days = (p.shares > 0).sum(axis=0)
        classes = {
            p.stock_ids[k]: duration_class(int(held_days[k]), p.span)
            for k in range(len(cols)) if held_days[k] > 0
        }
        counts = {c: 0 for c in DURATION_CLASSES}
        for c in classes.values():
            counts[c] += 1
        return _json_response({
            "id": pid,
            "lifespan": {"start": p.days[0].isoformat(), "end": p.days[-1].isoformat(),
                         "days": p.span},
            "per_day": per_day,
            "groups_meta": {
                "w_max": w_max,
                "boundaries": [w_max / 5.0 * k for k in range(1, 5)],
            },
            "legend": {"counts": counts, "classes": classes},
        })

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return _error(404, "unknown-job", f"no job {job_id!r}")
        return _json_response({
            "id": job.id,
            "state": job.state,
            "progress": float(job.progress),
            "result": job.result_ref if job.state == "done" else None,
            "error": job.error,
        })

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
