"""Per-day, per-stock market panel: exposures, sectors, prices, caps, returns."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .catalog import DEFAULT_CATALOG, N_FACTORS, N_SECTORS, FactorCatalog
from .errors import DimensionMismatchError, NonMonotoneDatesError, NonPositivePriceError


@dataclass(frozen=True)
class StockPanel:
    """Immutable market panel.

    Array shapes are (n_days, n_stocks, ...) and all share the trading-day and
    stock orderings below. ``std_exposure`` is expected to satisfy the
    value-weighted zero-mean property per day (see factors.standardize_exposures);
    validation here checks shapes and positivity, not the standardization itself,
    so panels can be built raw-first and standardized in a second pass.
    """

    trading_days: tuple[dt.date, ...]
    stocks: tuple[str, ...]
    raw_exposure: np.ndarray      # (T, J, 10)
    std_exposure: np.ndarray      # (T, J, 10)
    sector: np.ndarray            # (J,) ints in [0, 28)
    price: np.ndarray             # (T, J) > 0
    market_cap: np.ndarray        # (T, J) > 0
    stock_return: np.ndarray      # (T, J)
    catalog: FactorCatalog = DEFAULT_CATALOG

    def __post_init__(self):
        days = tuple(self.trading_days)
        stocks = tuple(str(s) for s in self.stocks)
        object.__setattr__(self, "trading_days", days)
        object.__setattr__(self, "stocks", stocks)
        for name in ("raw_exposure", "std_exposure", "sector", "price", "market_cap", "stock_return"):
            arr = np.asarray(getattr(self, name), dtype=np.int64 if name == "sector" else np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self._validate()
        object.__setattr__(self, "_day_index", {d: i for i, d in enumerate(days)})
        object.__setattr__(self, "_stock_index", {s: j for j, s in enumerate(stocks)})

    def _validate(self):
        t, j = len(self.trading_days), len(self.stocks)
        for name, shape in (
            ("raw_exposure", (t, j, N_FACTORS)),
            ("std_exposure", (t, j, N_FACTORS)),
            ("price", (t, j)),
            ("market_cap", (t, j)),
            ("stock_return", (t, j)),
            ("sector", (j,)),
        ):
            got = getattr(self, name).shape
            if got != shape:
                raise DimensionMismatchError("<panel>", f"{name} has shape {got}, expected {shape}")
        if len(set(self.stocks)) != j:
            raise DimensionMismatchError("<panel>", "duplicate stock ids")
        for i in range(1, t):
            if self.trading_days[i] <= self.trading_days[i - 1]:
                raise NonMonotoneDatesError(
                    "<panel>",
                    f"{self.trading_days[i - 1]} followed by {self.trading_days[i]}",
                )
        if self.sector.size and (self.sector.min() < 0 or self.sector.max() >= N_SECTORS):
            raise DimensionMismatchError("<panel>", f"sector indices must lie in [0, {N_SECTORS})")
        for name in ("price", "market_cap"):
            arr = getattr(self, name)
            bad = np.argwhere(~(arr > 0))
            if bad.size:
                ti, ji = bad[0]
                raise NonPositivePriceError("<panel>", int(ti * j + ji), name, float(arr[ti, ji]))
        if not np.isfinite(self.stock_return).all():
            raise DimensionMismatchError("<panel>", "non-finite stock returns")

    # -- lookups ------------------------------------------------------------

    @property
    def n_days(self) -> int:
        return len(self.trading_days)

    @property
    def n_stocks(self) -> int:
        return len(self.stocks)

    def day_index(self, day: dt.date) -> int:
        try:
            return self._day_index[day]
        except KeyError:
            raise KeyError(f"{day} is not a trading day of this panel") from None

    def stock_index(self, stock_id: str) -> int:
        return self._stock_index[stock_id]

    def has_stock(self, stock_id: str) -> bool:
        return stock_id in self._stock_index

    def value_weights(self, t: int) -> np.ndarray:
        """Market-cap weights on day t, normalized to sum 1."""
        caps = self.market_cap[t]
        return caps / caps.sum()

    def clip_days(self, start: dt.date, end: dt.date) -> tuple[int, int]:
        """Indices [i0, i1) of trading days inside [start, end], snapped inward."""
        days = self.trading_days
        i0 = next((i for i, d in enumerate(days) if d >= start), len(days))
        i1 = next((i for i in range(len(days) - 1, -1, -1) if days[i] <= end), -1) + 1
        return i0, max(i0, i1)


def parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text)
