"""Cross-sectional factor computations.

Exposure standardization, value-weighted portfolio aggregation, sector/cash
position aggregation, and daily factor-return estimation by OLS regression of
stock returns on standardized exposures:

    r_j = sum_s X_js * f_s + u_j          (one regression per trading day)

Standardization uses the value-weighted cross-sectional mean and the
equal-weighted population standard deviation, so the cap-weighted market
portfolio has exposure 0 to every factor by construction.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .catalog import DEFAULT_CATALOG, N_FACTORS, N_SECTORS, FactorCatalog
from .errors import (
    DegenerateFactorError,
    DimensionMismatchError,
    EmptyPortfolioError,
    SingularDesignError,
    UnknownDayError,
    UnknownStockError,
    ZeroValueDayError,
)
from .panel import StockPanel
from .portfolios import PortfolioSeries

CONDITION_LIMIT = 1e10
MIN_CROSS_SECTION = N_FACTORS + 1


@dataclass(frozen=True)
class CrossSection:
    """One day's regression inputs: standardized exposures, returns, value weights."""

    day: dt.date
    X: np.ndarray        # (J, 10)
    r: np.ndarray        # (J,)
    weights: np.ndarray  # (J,) market-cap weights summing to 1

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        r = np.asarray(self.r, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        for name, arr in (("X", X), ("r", r), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        j = X.shape[0]
        if X.ndim != 2 or X.shape[1] != N_FACTORS:
            raise DimensionMismatchError("<cross-section>", f"X shape {X.shape}")
        if r.shape != (j,) or w.shape != (j,):
            raise DimensionMismatchError("<cross-section>", "r/weights length mismatch with X")
        if j < MIN_CROSS_SECTION:
            raise DimensionMismatchError(
                "<cross-section>", f"{j} stocks < minimum {MIN_CROSS_SECTION}"
            )
        if not (np.isfinite(X).all() and np.isfinite(r).all()):
            raise DimensionMismatchError("<cross-section>", "missing or non-finite entries")
        if abs(w.sum() - 1.0) > 1e-9:
            raise DimensionMismatchError("<cross-section>", f"weights sum to {w.sum():.12f}")


@dataclass(frozen=True)
class FactorReturnMatrix:
    """Estimated daily factor returns with per-day residuals and fit stats."""

    days: tuple[dt.date, ...]
    f: np.ndarray              # (T, 10)
    residual: np.ndarray       # (T, J)
    r_squared: np.ndarray      # (T,)
    condition: np.ndarray      # (T,) condition number of X'X
    catalog: FactorCatalog = DEFAULT_CATALOG

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        for name in ("f", "residual", "r_squared", "condition"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.f.shape != (len(self.days), N_FACTORS):
            raise DimensionMismatchError("<factor-returns>", f"f shape {self.f.shape}")

    def day_index(self, day: dt.date) -> int:
        try:
            return self.days.index(day)
        except ValueError:
            raise UnknownDayError(day, "factor-return matrix") from None

    def slice_days(self, i0: int, i1: int) -> "FactorReturnMatrix":
        return FactorReturnMatrix(
            days=self.days[i0:i1],
            f=self.f[i0:i1],
            residual=self.residual[i0:i1],
            r_squared=self.r_squared[i0:i1],
            condition=self.condition[i0:i1],
            catalog=self.catalog,
        )


# ---------------------------------------------------------------------------
# Standardization
# ---------------------------------------------------------------------------

def standardize_exposures(
    raw: np.ndarray,
    market_cap: np.ndarray,
    catalog: FactorCatalog = DEFAULT_CATALOG,
    day: dt.date | None = None,
) -> np.ndarray:
    """Standardize a (stocks x factors) raw exposure block.

    Per factor column: X' = (X - mean_vw(X)) / std(X) where mean_vw is the
    market-cap-weighted mean and std the equal-weighted population standard
    deviation. The cap-weighted average of every output column is 0.

    Raises
    ------
    DegenerateFactorError
        If any column is constant (zero standard deviation).
    """
    raw = np.asarray(raw, dtype=np.float64)
    caps = np.asarray(market_cap, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[1] != len(catalog.style_factors):
        raise DimensionMismatchError("<standardize>", f"raw shape {raw.shape}")
    if raw.shape[0] < 2:
        raise DimensionMismatchError("<standardize>", "need at least 2 stocks")
    if (caps <= 0).any():
        raise DimensionMismatchError("<standardize>", "market caps must be > 0")
    weights = caps / caps.sum()
    mean_vw = weights @ raw
    sigma = raw.std(axis=0)  # population (ddof=0), equal-weighted
    zero = np.flatnonzero(sigma == 0.0)
    if zero.size:
        raise DegenerateFactorError(catalog.style_factors[zero[0]], day)
    return (raw - mean_vw) / sigma


def standardize_panel_exposures(
    raw: np.ndarray, market_cap: np.ndarray, catalog: FactorCatalog = DEFAULT_CATALOG,
    days: Sequence[dt.date] | None = None,
) -> np.ndarray:
    """Apply standardize_exposures day by day over a (days x stocks x factors) cube."""
    out = np.empty_like(np.asarray(raw, dtype=np.float64))
    for t in range(raw.shape[0]):
        day = days[t] if days is not None else None
        out[t] = standardize_exposures(raw[t], market_cap[t], catalog, day=day)
    return out


# ---------------------------------------------------------------------------
# Portfolio aggregation
# ---------------------------------------------------------------------------

def aggregate_portfolio_exposures(
    holdings: Mapping[str, float],
    prices: Mapping[str, float],
    std_exposures: Mapping[str, np.ndarray],
) -> np.ndarray:
    """Value-weighted average exposure vector of the held stocks.

    Cash is excluded: the exposures describe the stock sleeve only.
    """
    ids = [s for s, sh in holdings.items() if sh > 0]
    values = np.array([holdings[s] * prices[s] for s in ids], dtype=np.float64)
    total = values.sum()
    if not ids or total <= 0:
        raise EmptyPortfolioError()
    X = np.array([std_exposures[s] for s in ids], dtype=np.float64)
    return (values / total) @ X


def aggregate_sector_positions(
    holdings: Mapping[str, float],
    prices: Mapping[str, float],
    sector_of: Mapping[str, int],
    cash: float,
) -> np.ndarray:
    """29-vector of sector weights plus cash fraction, summing to 1.

    Each entry is value held in the sector (or cash) divided by total portfolio
    value including cash.
    """
    if cash < 0:
        raise DimensionMismatchError("<sector-positions>", "cash must be >= 0")
    ids = [s for s, sh in holdings.items() if sh > 0]
    values = np.array([holdings[s] * prices[s] for s in ids], dtype=np.float64)
    total = values.sum() + cash
    if total <= 0:
        raise EmptyPortfolioError("total portfolio value (stocks + cash) is 0")
    out = np.zeros(N_SECTORS + 1)
    for s, v in zip(ids, values):
        out[sector_of[s]] += v
    out /= total
    out[N_SECTORS] = cash / total
    return out


# ---------------------------------------------------------------------------
# Factor-return regression
# ---------------------------------------------------------------------------

def _collinear_columns(X: np.ndarray, catalog: FactorCatalog) -> list[str]:
    # Columns loading heavily on the near-null right-singular vector.
    _, s, vt = np.linalg.svd(X, full_matrices=False)
    v = np.abs(vt[-1])
    return [catalog.style_factors[i] for i in np.flatnonzero(v > 0.1 * v.max())]


def estimate_factor_returns(
    cs: CrossSection, catalog: FactorCatalog = DEFAULT_CATALOG
) -> tuple[np.ndarray, np.ndarray, dict]:
    """OLS estimate of the day's factor returns.

    Returns (f, residuals, fit_stats) where f minimizes ||r - X f||^2,
    residuals = r - X f, and fit_stats holds R^2 and the condition number
    of X'X.

    Raises
    ------
    SingularDesignError
        If cond(X'X) >= 1e10, reporting the collinear factor columns.
    """
    X, r = cs.X, cs.r
    gram = X.T @ X
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition >= CONDITION_LIMIT:
        raise SingularDesignError(condition, _collinear_columns(X, catalog), cs.day)
    f = np.linalg.solve(gram, X.T @ r)
    residuals = r - X @ f
    ss_res = float(residuals @ residuals)
    centered = r - r.mean()
    ss_tot = float(centered @ centered)
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return f, residuals, {"r_squared": r_squared, "condition": condition}


def cross_section(panel: StockPanel, t: int) -> CrossSection:
    return CrossSection(
        day=panel.trading_days[t],
        X=panel.std_exposure[t],
        r=panel.stock_return[t],
        weights=panel.value_weights(t),
    )


def estimate_panel_factor_returns(panel: StockPanel) -> FactorReturnMatrix:
    """Run the daily regression over every trading day of the panel."""
    t_days = panel.n_days
    f = np.empty((t_days, N_FACTORS))
    residual = np.empty((t_days, panel.n_stocks))
    r2 = np.empty(t_days)
    cond = np.empty(t_days)
    for t in range(t_days):
        f[t], residual[t], stats = estimate_factor_returns(cross_section(panel, t), panel.catalog)
        r2[t] = stats["r_squared"]
        cond[t] = stats["condition"]
    return FactorReturnMatrix(
        days=panel.trading_days, f=f, residual=residual,
        r_squared=r2, condition=cond, catalog=panel.catalog,
    )


def decompose_return(
    panel: StockPanel,
    factor_returns: FactorReturnMatrix,
    stock_id: str,
    day: dt.date,
) -> dict:
    """Split one stock-day return into per-factor contributions plus residual.

    contribution_s = X_js * f_s; the residual is whatever the factors do not
    explain, so contributions + residual reproduce the observed return exactly.
    """
    if not panel.has_stock(stock_id):
        raise UnknownStockError(stock_id, "return decomposition")
    try:
        t = panel.day_index(day)
    except KeyError:
        raise UnknownDayError(day, "return decomposition") from None
    j = panel.stock_index(stock_id)
    x = panel.std_exposure[t, j]
    f = factor_returns.f[factor_returns.day_index(day)]
    contributions = x * f
    observed = float(panel.stock_return[t, j])
    residual = observed - float(contributions.sum())
    return {
        "contributions": dict(zip(panel.catalog.style_factors, contributions.tolist())),
        "residual": residual,
        "observed": observed,
    }


# ---------------------------------------------------------------------------
# Derived portfolio fields (39-dim records and return series)
# ---------------------------------------------------------------------------

def compute_derived_fields(
    p: PortfolioSeries, panel: StockPanel
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-day 39-dim records plus value-based daily and cumulative returns.

    The daily return on span day t >= 1 revalues yesterday's positions at
    today's prices, so internal self-financing trades produce no spurious
    flows; the first span day gets return 0.
    """
    t0 = panel.day_index(p.days[0])
    t1 = panel.day_index(p.days[-1])
    if panel.trading_days[t0:t1 + 1] != p.days:
        raise DimensionMismatchError(p.id, "portfolio days are not contiguous panel trading days")
    cols = np.array([panel.stock_index(s) for s in p.stock_ids], dtype=np.intp)

    prices = panel.price[t0:t1 + 1, cols]                    # (T, K)
    values = p.shares * prices
    total_stock = values.sum(axis=1)
    total = total_stock + p.cash
    if (total_stock <= 0).any():
        raise EmptyPortfolioError(
            f"portfolio {p.id}: total stock value is 0 on "
            f"{p.days[int(np.argmax(total_stock <= 0))]}"
        )

    X = panel.std_exposure[t0:t1 + 1, :, :][:, cols, :]      # (T, K, 10)
    w_stock = values / total_stock[:, None]
    exposures = np.einsum("tk,tks->ts", w_stock, X)

    sectors = np.zeros((p.span, N_SECTORS))
    sec_idx = panel.sector[cols]
    for k in range(len(cols)):
        sectors[:, sec_idx[k]] += values[:, k]
    sectors /= total[:, None]
    cash_frac = p.cash / total
    record = np.concatenate([exposures, sectors, cash_frac[:, None]], axis=1)

    daily, cumulative = portfolio_value_returns(p, panel)
    return record, daily, cumulative


def portfolio_value_returns(
    p: PortfolioSeries, panel: StockPanel
) -> tuple[np.ndarray, np.ndarray]:
    """Value-based daily and cumulative return series aligned to the span.

    Day t's return revalues day t-1 positions at day t prices (net of external
    flows); the first span day is 0 by convention.
    """
    t0 = panel.day_index(p.days[0])
    cols = np.array([panel.stock_index(s) for s in p.stock_ids], dtype=np.intp)
    prices = panel.price[t0:t0 + p.span, cols]
    total = (p.shares * prices).sum(axis=1) + p.cash
    daily = np.zeros(p.span)
    if p.span > 1:
        held_value_today = (p.shares[:-1] * prices[1:]).sum(axis=1) + p.cash[:-1]
        base = total[:-1]
        if (base <= 0).any():
            raise ZeroValueDayError(p.days[int(np.argmax(base <= 0))])
        daily[1:] = held_value_today / base - 1.0
    cumulative = np.cumprod(1.0 + daily) - 1.0
    return daily, cumulative


def attach_derived_fields(
    portfolios: Sequence[PortfolioSeries], panel: StockPanel
) -> list[PortfolioSeries]:
    return [p.with_derived(*compute_derived_fields(p, panel)) for p in portfolios]


def index_derived_fields(
    panel: StockPanel, weights: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Record and return series for a weight-defined index over the full panel."""
    exposures = np.einsum("tj,tjs->ts", weights, panel.std_exposure)
    sectors = np.zeros((panel.n_days, N_SECTORS))
    np.add.at(sectors.T, panel.sector, weights.T)
    cash = np.zeros((panel.n_days, 1))
    record = np.concatenate([exposures, sectors, cash], axis=1)
    daily = (weights * panel.stock_return).sum(axis=1)
    cumulative = np.cumprod(1.0 + daily) - 1.0
    return record, daily, cumulative
