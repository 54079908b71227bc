"""Time-series analytics over factor and portfolio returns.

Accumulated returns R_i = prod(1 + r_k) - 1, centered rolling Pearson
correlations over a +/-window span, and period correlation matrices. Undefined
points (incomplete windows, zero variance) are NaN, never fabricated.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .catalog import N_FACTORS
from .errors import EmptyRangeError, InvalidReturnError, MisalignedSeriesError
from .factors import FactorReturnMatrix, portfolio_value_returns
from .panel import StockPanel
from .portfolios import PortfolioSeries

DEFAULT_WINDOW = 20


@dataclass(frozen=True)
class CumulativeReturnSeries:
    days: tuple[dt.date, ...]
    R: np.ndarray

    @classmethod
    def from_daily(cls, days, daily) -> "CumulativeReturnSeries":
        return cls(days=tuple(days), R=cumulative_return(daily))


@dataclass(frozen=True)
class CorrelationSurface:
    """Rolling and whole-period factor-return correlations.

    ``rolling`` is (10, 10, T) with NaN where the centered window exits the
    range or a window is degenerate; ``period`` is the (10, 10) matrix over
    the full [start, end] slice. Both are symmetric.
    """

    days: tuple[dt.date, ...]
    rolling: np.ndarray
    period: np.ndarray
    window: int
    start: dt.date
    end: dt.date


def cumulative_return(daily) -> np.ndarray:
    """Left-to-right compounded return: R[i] = prod_{k<=i}(1 + r_k) - 1."""
    r = np.asarray(daily, dtype=np.float64)
    bad = np.flatnonzero(r <= -1.0)
    if bad.size:
        raise InvalidReturnError(int(bad[0]), float(r[bad[0]]))
    return np.cumprod(1.0 + r) - 1.0


def rolling_correlation(r_j, r_k, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Centered rolling Pearson correlation of two aligned series.

    The value at index i is the correlation over the inclusive span
    [i - window, i + window] (2*window + 1 points); indices whose span exits
    the series, and zero-variance windows, are NaN.
    """
    a = np.asarray(r_j, dtype=np.float64)
    b = np.asarray(r_k, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise MisalignedSeriesError(f"shapes {a.shape} vs {b.shape}")
    if window < 2:
        raise ValueError("window must be >= 2")
    n = a.size
    out = np.full(n, np.nan)
    span = 2 * window + 1
    if n < span:
        return out
    wa = sliding_window_view(a, span)
    wb = sliding_window_view(b, span)
    ca = wa - wa.mean(axis=1, keepdims=True)
    cb = wb - wb.mean(axis=1, keepdims=True)
    cov = (ca * cb).sum(axis=1)
    denom = np.sqrt((ca * ca).sum(axis=1) * (cb * cb).sum(axis=1))
    # constant windows have zero variance; mean-subtraction dust must not
    # resurrect them as spurious +/-1 correlations
    degenerate = (np.ptp(wa, axis=1) == 0) | (np.ptp(wb, axis=1) == 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(~degenerate & (denom > 0), cov / denom, np.nan)
    out[window:n - window] = np.clip(vals, -1.0, 1.0)
    return out


def pearson_matrix(columns: np.ndarray) -> np.ndarray:
    """Pairwise Pearson correlation of the columns; degenerate entries NaN."""
    c = columns - columns.mean(axis=0)
    norms = np.sqrt((c * c).sum(axis=0))
    norms[np.ptp(columns, axis=0) == 0] = 0.0  # constant column, not fp dust
    cov = c.T @ c
    denom = np.outer(norms, norms)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.where(denom > 0, cov / denom, np.nan)
    return np.clip(rho, -1.0, 1.0)


def period_correlation_matrix(
    frm: FactorReturnMatrix, start: dt.date, end: dt.date
) -> np.ndarray:
    """Factor-return correlation matrix over the trading days in [start, end]."""
    if not start < end:
        raise EmptyRangeError(f"start {start} must precede end {end}")
    idx = [i for i, d in enumerate(frm.days) if start <= d <= end]
    if len(idx) < 3:
        raise EmptyRangeError(f"[{start}, {end}] contains {len(idx)} trading days; need >= 3")
    return pearson_matrix(frm.f[idx])


def build_correlation_surface(
    frm: FactorReturnMatrix,
    start: dt.date,
    end: dt.date,
    window: int = DEFAULT_WINDOW,
) -> CorrelationSurface:
    """Period matrix plus per-pair rolling series restricted to [start, end].

    Rolling values are computed on the full factor-return history (a window
    centered inside the period may reach outside it) and then sliced to the
    period's days.
    """
    period = period_correlation_matrix(frm, start, end)
    idx = [i for i, d in enumerate(frm.days) if start <= d <= end]
    i0, i1 = idx[0], idx[-1] + 1
    days = frm.days[i0:i1]
    rolling = np.full((N_FACTORS, N_FACTORS, i1 - i0), np.nan)
    for j in range(N_FACTORS):
        for k in range(j, N_FACTORS):
            series = rolling_correlation(frm.f[:, j], frm.f[:, k], window)[i0:i1]
            rolling[j, k] = series
            rolling[k, j] = series
    return CorrelationSurface(
        days=days, rolling=rolling, period=period, window=window, start=start, end=end
    )


def portfolio_return_series(
    p: PortfolioSeries, panel: StockPanel
) -> tuple[tuple[dt.date, ...], np.ndarray, np.ndarray]:
    """Daily and cumulative value-based returns over the span transitions.

    Returns (days[1:], daily, cumulative): three-day spans have two returns,
    matching one return per day-over-day transition.
    """
    daily_full, cumulative_full = portfolio_value_returns(p, panel)
    return p.days[1:], daily_full[1:], cumulative_full[1:]


def surface_to_payload(surface: CorrelationSurface, catalog) -> dict:
    """JSON-ready dict: {range, window, period with nulls, rolling per pair}."""
    def clean(x: float):
        return None if np.isnan(x) else float(x)

    rolling = {}
    for j in range(N_FACTORS):
        for k in range(j, N_FACTORS):
            key = f"{j},{k}"
            rolling[key] = [
                {"date": d.isoformat(), "value": clean(v)}
                for d, v in zip(surface.days, surface.rolling[j, k])
            ]
    return {
        "range": {"start": surface.start.isoformat(), "end": surface.end.isoformat()},
        "window": surface.window,
        "factors": list(catalog.style_factors),
        "period": [[clean(v) for v in row] for row in surface.period],
        "rolling": rolling,
    }
