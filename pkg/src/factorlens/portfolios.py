"""Backtest portfolios and benchmark indices."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace

import numpy as np

from .catalog import N_SECTORS, RECORD_DIM
from .errors import DimensionMismatchError, NonMonotoneDatesError, SpanTooShortError
from .panel import StockPanel

MIN_SPAN = 20
MAX_SPAN = 400
RECORD_SUM_TOL = 1e-9


@dataclass(frozen=True)
class PortfolioSeries:
    """One backtest record.

    ``stock_ids`` lists every stock the portfolio ever holds; ``shares`` has one
    row per span day and one column per stock id (0 when not held). Derived
    fields (``record``, ``daily_return``, ``cumulative_return``) are None until
    attached via :meth:`with_derived`; the 39-dim record is 10 exposures, 28
    sector weights and one cash fraction, whose last 29 entries sum to 1.
    """

    id: str
    days: tuple[dt.date, ...]
    stock_ids: tuple[str, ...]
    shares: np.ndarray            # (T, K) >= 0
    cash: np.ndarray              # (T,) >= 0
    record: np.ndarray | None = None           # (T, 39)
    daily_return: np.ndarray | None = None     # (T,), first entry 0
    cumulative_return: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        object.__setattr__(self, "stock_ids", tuple(str(s) for s in self.stock_ids))
        shares = np.asarray(self.shares, dtype=np.float64)
        cash = np.asarray(self.cash, dtype=np.float64)
        shares.setflags(write=False)
        cash.setflags(write=False)
        object.__setattr__(self, "shares", shares)
        object.__setattr__(self, "cash", cash)
        t, k = len(self.days), len(self.stock_ids)
        if not MIN_SPAN <= t <= MAX_SPAN:
            raise SpanTooShortError(self.id, t, MIN_SPAN) if t < MIN_SPAN else \
                DimensionMismatchError(self.id, f"span {t} exceeds maximum {MAX_SPAN}")
        if any(self.days[i] >= self.days[i + 1] for i in range(t - 1)):
            raise NonMonotoneDatesError(self.id, "portfolio days must be strictly increasing")
        if shares.shape != (t, k):
            raise DimensionMismatchError(self.id, f"shares shape {shares.shape} != ({t}, {k})")
        if cash.shape != (t,):
            raise DimensionMismatchError(self.id, f"cash shape {cash.shape} != ({t},)")
        if (shares < 0).any():
            raise DimensionMismatchError(self.id, "negative share counts")
        if (cash < 0).any():
            raise DimensionMismatchError(self.id, "negative cash")
        for name in ("record", "daily_return", "cumulative_return"):
            val = getattr(self, name)
            if val is None:
                continue
            val = np.asarray(val, dtype=np.float64)
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        if self.record is not None:
            if self.record.shape != (t, RECORD_DIM):
                raise DimensionMismatchError(
                    self.id, f"record shape {self.record.shape} != ({t}, {RECORD_DIM})"
                )
            sums = self.record[:, -(N_SECTORS + 1):].sum(axis=1)
            if np.abs(sums - 1.0).max() > RECORD_SUM_TOL:
                raise DimensionMismatchError(
                    self.id,
                    f"sector weights + cash fraction sum to {sums[np.abs(sums - 1).argmax()]:.12f}, not 1",
                )

    @property
    def span(self) -> int:
        return len(self.days)

    def holdings_on(self, t: int) -> dict[str, float]:
        """Sparse stock -> shares map for span day t (held stocks only)."""
        row = self.shares[t]
        return {s: float(row[k]) for k, s in enumerate(self.stock_ids) if row[k] > 0}

    def with_derived(
        self,
        record: np.ndarray,
        daily_return: np.ndarray,
        cumulative_return: np.ndarray,
    ) -> "PortfolioSeries":
        return replace(
            self,
            record=record,
            daily_return=daily_return,
            cumulative_return=cumulative_return,
        )


@dataclass(frozen=True)
class MarketIndex:
    """Cap-weighted benchmark defined directly by per-day weights over the panel."""

    name: str
    days: tuple[dt.date, ...]
    stock_ids: tuple[str, ...]
    weights: np.ndarray           # (T, J) rows sum to 1
    record: np.ndarray | None = None
    daily_return: np.ndarray | None = None
    cumulative_return: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "days", tuple(self.days))
        object.__setattr__(self, "stock_ids", tuple(self.stock_ids))
        for name in ("weights", "record", "daily_return", "cumulative_return"):
            val = getattr(self, name)
            if val is None:
                continue
            val = np.asarray(val, dtype=np.float64)
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        sums = self.weights.sum(axis=1)
        if np.abs(sums - 1.0).max() > RECORD_SUM_TOL:
            raise DimensionMismatchError(self.name, "index weights must sum to 1 per day")

    @property
    def span(self) -> int:
        return len(self.days)


def build_benchmarks(panel: StockPanel) -> tuple[MarketIndex, MarketIndex]:
    """Construct the two cap-weighted benchmarks from a panel.

    CSI300 here is the cap-weighted portfolio of the whole universe (the market
    proxy, with zero exposure to every standardized factor by construction);
    CSI500 cap-weights the below-median-cap half of each day, giving it the
    usual small-cap tilt.
    """
    caps = panel.market_cap
    t, j = caps.shape
    full = caps / caps.sum(axis=1, keepdims=True)

    small = np.zeros_like(caps)
    for i in range(t):
        cutoff = np.median(caps[i])
        mask = caps[i] < cutoff
        if not mask.any():  # degenerate equal-cap day: take the lower half by index
            mask = np.arange(j) < j // 2
        small[i, mask] = caps[i, mask]
    small /= small.sum(axis=1, keepdims=True)

    from .factors import index_derived_fields  # local import; factors depends on this module

    benchmarks = []
    for name, weights in (("CSI300", full), ("CSI500", small)):
        record, daily, cumulative = index_derived_fields(panel, weights)
        benchmarks.append(
            MarketIndex(
                name=name,
                days=panel.trading_days,
                stock_ids=panel.stocks,
                weights=weights,
                record=record,
                daily_return=daily,
                cumulative_return=cumulative,
            )
        )
    return benchmarks[0], benchmarks[1]
