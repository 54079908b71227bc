"""Synthetic market generator with planted factor structure.

Returns are generated exactly as r = X'. f + u with known factor returns f and
residuals u, where X' is the day's standardized exposure matrix, so regression,
correlation, and clustering all have ground truth. Portfolios are built from
archetype templates: stock selection plus a simplex-constrained weight solve
steer each portfolio's value-weighted exposures toward its archetype's target
vector. The whole generation is a pure function of the config.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .catalog import DEFAULT_CATALOG, N_FACTORS, N_SECTORS
from .errors import ConfigError, InfeasibleArchetypeError
from .factors import standardize_exposures
from .panel import StockPanel
from .portfolios import MAX_SPAN, MIN_SPAN, PortfolioSeries

EXPOSURE_TOLERANCE = 0.5


@dataclass(frozen=True)
class SyntheticConfig:
    n_stocks: int
    n_days: int
    n_portfolios: int
    n_archetypes: int
    archetype_exposures: tuple[tuple[float, ...], ...]   # (K, 10) targets
    archetype_sectors: tuple[tuple[float, ...], ...] | None = None  # (K, 28) preferences
    planted_factor_returns: tuple[tuple[float, ...], ...] | None = None  # (T, 10)
    residual_vol: float = 0.0
    seed: int = 0
    # realism knobs, all defaulted; generation stays a pure function of the config
    start_date: dt.date = dt.date(2016, 1, 4)
    factor_return_vol: float = 0.008
    exposure_walk_vol: float = 0.01
    stocks_per_portfolio: tuple[int, int] = (12, 30)
    cash_fraction_range: tuple[float, float] = (0.02, 0.15)
    initial_capital: float = 1.0e7
    trade_events: tuple[int, int] = (0, 5)
    span_range: tuple[int, int] = (MIN_SPAN, MAX_SPAN)

    def __post_init__(self):
        for name in ("n_stocks", "n_days", "n_portfolios", "n_archetypes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.n_archetypes > self.n_portfolios:
            raise ConfigError("n_archetypes must not exceed n_portfolios")
        targets = np.asarray(self.archetype_exposures, dtype=np.float64)
        if targets.shape != (self.n_archetypes, N_FACTORS):
            raise ConfigError(
                f"archetype_exposures shape {targets.shape} != ({self.n_archetypes}, {N_FACTORS})"
            )
        if self.archetype_sectors is not None:
            prefs = np.asarray(self.archetype_sectors, dtype=np.float64)
            if prefs.shape != (self.n_archetypes, N_SECTORS) or (prefs < 0).any():
                raise ConfigError("archetype_sectors must be nonnegative (K, 28)")
        if self.planted_factor_returns is not None:
            f = np.asarray(self.planted_factor_returns, dtype=np.float64)
            if f.shape != (self.n_days, N_FACTORS):
                raise ConfigError(
                    f"planted_factor_returns shape {f.shape} != ({self.n_days}, {N_FACTORS})"
                )
        if self.residual_vol < 0:
            raise ConfigError("residual_vol must be >= 0")
        lo, hi = self.span_range
        if not (MIN_SPAN <= lo <= hi <= MAX_SPAN):
            raise ConfigError(f"span_range must lie within [{MIN_SPAN}, {MAX_SPAN}]")
        if lo > self.n_days:
            raise ConfigError("span_range minimum exceeds n_days")


@dataclass(frozen=True)
class PlantedTruth:
    factor_returns: np.ndarray      # (T, 10)
    residuals: np.ndarray           # (T, J)
    archetype_of: dict[str, int]
    archetype_exposures: np.ndarray  # (K, 10)


def trading_calendar(start: dt.date, n_days: int) -> tuple[dt.date, ...]:
    """n_days weekday dates starting at the first weekday >= start."""
    days = []
    d = start
    while len(days) < n_days:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return tuple(days)


def _simplex_weights(A: np.ndarray, target: np.ndarray, iters: int = 400) -> np.ndarray:
    """Frank-Wolfe solve of min ||A'w - target||^2 over the probability simplex.

    A is (m, 10) candidate exposures; returns w (m,) >= 0 summing to 1.
    """
    m = A.shape[0]
    w = np.full(m, 1.0 / m)
    Aw = A.T @ w
    for _ in range(iters):
        grad = A @ (Aw - target)
        i = int(np.argmin(grad))
        d_Aw = A[i] - Aw
        denom = float(d_Aw @ d_Aw)
        if denom <= 1e-18:
            break
        gamma = float(np.clip(-((Aw - target) @ d_Aw) / denom, 0.0, 1.0))
        if gamma <= 0.0:
            break
        w *= 1.0 - gamma
        w[i] += gamma
        Aw += gamma * d_Aw
    return w


def generate_synthetic_market(
    cfg: SyntheticConfig,
) -> tuple[StockPanel, list[PortfolioSeries], PlantedTruth]:
    rng = np.random.default_rng(cfg.seed)
    J, T, K = cfg.n_stocks, cfg.n_days, cfg.n_archetypes
    days = trading_calendar(cfg.start_date, T)
    catalog = DEFAULT_CATALOG

    sector = np.concatenate([np.arange(min(J, N_SECTORS)), rng.integers(0, N_SECTORS, max(0, J - N_SECTORS))])
    rng.shuffle(sector)

    cap0 = np.exp(rng.normal(np.log(5e9), 1.2, J))
    price0 = np.exp(rng.normal(np.log(20.0), 0.4, J))

    # Base exposures: size tracks log-cap, non-linear size is its third Hermite
    # polynomial (orthogonal to size under the normal cross-section), the rest
    # are independent draws. A small random walk makes them drift slowly.
    base = rng.normal(0.0, 1.0, (J, N_FACTORS))
    z = (np.log(cap0) - np.log(cap0).mean()) / np.log(cap0).std()
    base[:, catalog.factor_index("size")] = z
    base[:, catalog.factor_index("non_linear_size")] = (z ** 3 - 3 * z) / np.sqrt(6.0)
    walk = np.cumsum(rng.normal(0.0, cfg.exposure_walk_vol, (T, J, N_FACTORS)), axis=0)
    raw = base[None, :, :] + walk

    if cfg.planted_factor_returns is not None:
        f = np.asarray(cfg.planted_factor_returns, dtype=np.float64)
    else:
        f = rng.normal(0.0, cfg.factor_return_vol, (T, N_FACTORS))
    u = (
        rng.normal(0.0, cfg.residual_vol, (T, J))
        if cfg.residual_vol > 0
        else np.zeros((T, J))
    )

    std = np.empty_like(raw)
    price = np.empty((T, J))
    caps = np.empty((T, J))
    returns = np.empty((T, J))
    price[0], caps[0] = price0, cap0
    for t in range(T):
        std[t] = standardize_exposures(raw[t], caps[t], catalog, day=days[t])
        returns[t] = std[t] @ f[t] + u[t]
        if (returns[t] <= -1.0).any():
            raise ConfigError(
                f"generated return <= -1 on {days[t]}; reduce factor/residual volatility"
            )
        if t + 1 < T:
            price[t + 1] = price[t] * (1.0 + returns[t])
            caps[t + 1] = caps[t] * (1.0 + returns[t])

    panel = StockPanel(
        trading_days=days,
        stocks=tuple(f"{600000 + j}" for j in range(J)),
        raw_exposure=raw,
        std_exposure=std,
        sector=sector,
        price=price,
        market_cap=caps,
        stock_return=returns,
        catalog=catalog,
    )

    targets = np.asarray(cfg.archetype_exposures, dtype=np.float64)
    prefs = (
        np.asarray(cfg.archetype_sectors, dtype=np.float64)
        if cfg.archetype_sectors is not None
        else np.ones((K, N_SECTORS))
    )
    id_width = max(4, len(str(cfg.n_portfolios)))
    labels = np.arange(cfg.n_portfolios) % K

    # Feasibility gate per archetype: if even the full universe cannot reach the
    # target on day 0, no subset can either.
    for k in range(K):
        w = _simplex_weights(std[0], targets[k])
        gap = float(np.abs(std[0].T @ w - targets[k]).max())
        if gap > EXPOSURE_TOLERANCE:
            raise InfeasibleArchetypeError(k, gap, EXPOSURE_TOLERANCE)

    portfolios = []
    for i in range(cfg.n_portfolios):
        k = int(labels[i])
        span = int(rng.integers(cfg.span_range[0], min(cfg.span_range[1], T) + 1))
        t_start = int(rng.integers(0, T - span + 1))
        m = int(rng.integers(cfg.stocks_per_portfolio[0], cfg.stocks_per_portfolio[1] + 1))

        X0 = std[t_start]
        dist2 = ((X0 - targets[k]) ** 2).sum(axis=1)
        score = np.exp(-dist2 / 8.0) * (prefs[k][sector] + 0.02)
        pool_size = min(J, 3 * m)
        pool = rng.choice(J, size=pool_size, replace=False, p=score / score.sum())
        w_pool = _simplex_weights(X0[pool], targets[k])
        keep = w_pool > 1e-3
        if keep.sum() < 2 or np.abs(X0[pool].T @ w_pool - targets[k]).max() > EXPOSURE_TOLERANCE:
            pool = np.arange(J)
            w_pool = _simplex_weights(X0, targets[k])
            keep = w_pool > 1e-3
        chosen = pool[keep]
        weights = w_pool[keep] / w_pool[keep].sum()

        cash_frac = rng.uniform(*cfg.cash_fraction_range)
        budget = cfg.initial_capital * (1.0 - cash_frac)
        shares0 = np.floor(budget * weights / price[t_start, chosen])
        leftover = budget - float(shares0 @ price[t_start, chosen])
        cash0 = cfg.initial_capital * cash_frac + leftover

        stock_ids = [panel.stocks[j] for j in chosen]
        col_of = {j: c for c, j in enumerate(chosen)}
        shares = np.tile(shares0, (span, 1))
        cash = np.full(span, cash0)

        n_events = int(rng.integers(cfg.trade_events[0], cfg.trade_events[1] + 1))
        n_events = min(n_events, span - 2) if span > 2 else 0
        if n_events > 0:
            event_offsets = np.sort(
                rng.choice(np.arange(1, span), size=n_events, replace=False)
            )
            for off in event_offsets:
                t_abs = t_start + int(off)
                held = [c for c in range(shares.shape[1]) if shares[off, c] > 0]
                if len(held) <= 2:
                    continue
                sell_col = int(rng.choice(held))
                buy_j = int(rng.choice(J, p=score / score.sum()))
                if buy_j == chosen[sell_col]:
                    continue
                if buy_j not in col_of:
                    col_of[buy_j] = shares.shape[1]
                    chosen = np.append(chosen, buy_j)
                    stock_ids.append(panel.stocks[buy_j])
                    shares = np.hstack([shares, np.zeros((span, 1))])
                buy_col = col_of[buy_j]
                # self-financing swap at day t_abs prices; rounding residue to cash
                proceeds = float(shares[off, sell_col] * price[t_abs, chosen[sell_col]])
                buy_shares = np.floor(proceeds / price[t_abs, buy_j])
                residual_cash = proceeds - float(buy_shares * price[t_abs, buy_j])
                shares[off:, sell_col] = 0.0
                shares[off:, buy_col] += buy_shares
                cash[off:] += residual_cash

        portfolios.append(
            PortfolioSeries(
                id=str(i + 1).zfill(id_width),
                days=days[t_start:t_start + span],
                stock_ids=tuple(stock_ids),
                shares=shares,
                cash=cash,
            )
        )

    truth = PlantedTruth(
        factor_returns=f,
        residuals=u,
        archetype_of={p.id: int(labels[i]) for i, p in enumerate(portfolios)},
        archetype_exposures=targets,
    )
    return panel, portfolios, truth
