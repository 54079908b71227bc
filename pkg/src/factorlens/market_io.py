"""Reading and writing the on-disk market formats.

csv-bundle: `panel_exposures.csv` (date, stock_id, 10 raw factor columns),
`panel_market.csv` (date, stock_id, price, market_cap, return), `sectors.csv`
(stock_id, sector_index), `portfolios.jsonl`. json-lines: a single
`panel.jsonl` with a header line (stocks, sectors, factors) followed by one
object per day.

Standardized exposures are never stored; loaders recompute them from the raw
columns, so write(load(x)) reproduces x byte for byte. Floats are written with
repr (exact round trip; 12+ significant digits whenever that many are needed).
Row numbers in errors are 1-based file lines including the header.
"""
from __future__ import annotations

import datetime as dt
import json
import os
from typing import Iterable, Sequence

import numpy as np

from .catalog import DEFAULT_CATALOG, N_FACTORS, N_SECTORS, FactorCatalog
from .errors import (
    DateOutOfRangeError,
    DimensionMismatchError,
    MissingColumnError,
    NonMonotoneDatesError,
    NonPositivePriceError,
    SpanTooShortError,
    UnknownStockError,
)
from .factors import standardize_panel_exposures
from .panel import StockPanel, parse_date
from .portfolios import MIN_SPAN, PortfolioSeries

EXPOSURES_FILE = "panel_exposures.csv"
MARKET_FILE = "panel_market.csv"
SECTORS_FILE = "sectors.csv"
PORTFOLIOS_FILE = "portfolios.jsonl"
PANEL_JSONL_FILE = "panel.jsonl"


def _fmt(x: float) -> str:
    return repr(float(x))


def _read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DimensionMismatchError(path, "empty file")
    return rows[0], rows[1:]


def _require_columns(path: str, header: Sequence[str], required: Iterable[str]) -> dict[str, int]:
    index = {name: i for i, name in enumerate(header)}
    for name in required:
        if name not in index:
            raise MissingColumnError(path, name)
    return index


# ---------------------------------------------------------------------------
# Panel
# ---------------------------------------------------------------------------

def load_panel(path: str, format: str = "csv-bundle",
               catalog: FactorCatalog = DEFAULT_CATALOG) -> StockPanel:
    if format == "csv-bundle":
        return _load_panel_csv(path, catalog)
    if format == "json-lines":
        return _load_panel_jsonl(path, catalog)
    raise ValueError(f"unknown panel format {format!r}")


def write_panel(panel: StockPanel, path: str, format: str = "csv-bundle") -> None:
    os.makedirs(path, exist_ok=True)
    if format == "csv-bundle":
        _write_panel_csv(panel, path)
    elif format == "json-lines":
        _write_panel_jsonl(panel, path)
    else:
        raise ValueError(f"unknown panel format {format!r}")


def _load_panel_csv(path: str, catalog: FactorCatalog) -> StockPanel:
    sec_path = os.path.join(path, SECTORS_FILE)
    header, rows = _read_csv(sec_path)
    cols = _require_columns(sec_path, header, ["stock_id", "sector_index"])
    sector_of: dict[str, int] = {}
    for r, row in enumerate(rows, start=2):
        sid = row[cols["stock_id"]]
        if sid in sector_of:
            raise DimensionMismatchError(sec_path, f"row {r}: duplicate stock id {sid}")
        idx = int(row[cols["sector_index"]])
        if not 0 <= idx < N_SECTORS:
            raise DimensionMismatchError(sec_path, f"row {r}: sector_index {idx} out of range")
        sector_of[sid] = idx
    stocks = tuple(sorted(sector_of))
    stock_col = {s: j for j, s in enumerate(stocks)}

    mkt_path = os.path.join(path, MARKET_FILE)
    header, rows = _read_csv(mkt_path)
    cols = _require_columns(mkt_path, header, ["date", "stock_id", "price", "market_cap", "return"])
    days: list[dt.date] = []
    cells: dict[tuple[int, int], tuple[float, float, float]] = {}
    for r, row in enumerate(rows, start=2):
        day = parse_date(row[cols["date"]])
        if not days or day > days[-1]:
            days.append(day)
        elif day < days[-1]:
            raise NonMonotoneDatesError(mkt_path, f"row {r}: {day} after {days[-1]}")
        sid = row[cols["stock_id"]]
        if sid not in stock_col:
            raise UnknownStockError(sid, f"{mkt_path} row {r}")
        price = float(row[cols["price"]])
        cap = float(row[cols["market_cap"]])
        for field, value in (("price", price), ("market_cap", cap)):
            if not value > 0:
                raise NonPositivePriceError(mkt_path, r, field, value)
        key = (len(days) - 1, stock_col[sid])
        if key in cells:
            raise DimensionMismatchError(mkt_path, f"row {r}: duplicate (date, stock) entry")
        cells[key] = (price, cap, float(row[cols["return"]]))

    t_days, j_stocks = len(days), len(stocks)
    if len(cells) != t_days * j_stocks:
        raise DimensionMismatchError(
            mkt_path, f"{len(cells)} rows for {t_days} days x {j_stocks} stocks"
        )
    price = np.empty((t_days, j_stocks))
    caps = np.empty((t_days, j_stocks))
    rets = np.empty((t_days, j_stocks))
    for (t, j), (p, c, r_) in cells.items():
        price[t, j], caps[t, j], rets[t, j] = p, c, r_

    exp_path = os.path.join(path, EXPOSURES_FILE)
    header, rows = _read_csv(exp_path)
    cols = _require_columns(exp_path, header, ["date", "stock_id", *catalog.style_factors])
    raw = np.full((t_days, j_stocks, N_FACTORS), np.nan)
    day_idx = {d: t for t, d in enumerate(days)}
    for r, row in enumerate(rows, start=2):
        day = parse_date(row[cols["date"]])
        if day not in day_idx:
            raise DimensionMismatchError(exp_path, f"row {r}: date {day} absent from market file")
        sid = row[cols["stock_id"]]
        if sid not in stock_col:
            raise UnknownStockError(sid, f"{exp_path} row {r}")
        raw[day_idx[day], stock_col[sid]] = [
            float(row[cols[name]]) for name in catalog.style_factors
        ]
    if np.isnan(raw).any():
        raise DimensionMismatchError(exp_path, "missing exposure rows for some (date, stock) pairs")

    std = standardize_panel_exposures(raw, caps, catalog, days=days)
    sector = np.array([sector_of[s] for s in stocks], dtype=np.int64)
    return StockPanel(
        trading_days=tuple(days), stocks=stocks, raw_exposure=raw, std_exposure=std,
        sector=sector, price=price, market_cap=caps, stock_return=rets, catalog=catalog,
    )


def _write_panel_csv(panel: StockPanel, path: str) -> None:
    cat = panel.catalog
    with open(os.path.join(path, SECTORS_FILE), "w", newline="\n") as fh:
        fh.write("stock_id,sector_index\n")
        for s in sorted(panel.stocks):
            fh.write(f"{s},{panel.sector[panel.stock_index(s)]}\n")
    with open(os.path.join(path, MARKET_FILE), "w", newline="\n") as fh:
        fh.write("date,stock_id,price,market_cap,return\n")
        for t, day in enumerate(panel.trading_days):
            for s in sorted(panel.stocks):
                j = panel.stock_index(s)
                fh.write(
                    f"{day.isoformat()},{s},{_fmt(panel.price[t, j])},"
                    f"{_fmt(panel.market_cap[t, j])},{_fmt(panel.stock_return[t, j])}\n"
                )
    with open(os.path.join(path, EXPOSURES_FILE), "w", newline="\n") as fh:
        fh.write("date,stock_id," + ",".join(cat.style_factors) + "\n")
        for t, day in enumerate(panel.trading_days):
            for s in sorted(panel.stocks):
                j = panel.stock_index(s)
                values = ",".join(_fmt(v) for v in panel.raw_exposure[t, j])
                fh.write(f"{day.isoformat()},{s},{values}\n")


def _load_panel_jsonl(path: str, catalog: FactorCatalog) -> StockPanel:
    file_path = os.path.join(path, PANEL_JSONL_FILE) if os.path.isdir(path) else path
    with open(file_path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines:
        raise DimensionMismatchError(file_path, "empty file")
    head = lines[0]
    for key in ("stocks", "sectors", "factors"):
        if key not in head:
            raise MissingColumnError(file_path, key)
    if tuple(head["factors"]) != catalog.style_factors:
        raise DimensionMismatchError(file_path, "factor ordering differs from catalog")
    stocks = tuple(head["stocks"])
    days, raw, price, caps, rets = [], [], [], [], []
    for i, obj in enumerate(lines[1:], start=2):
        for key in ("date", "raw_exposure", "price", "market_cap", "stock_return"):
            if key not in obj:
                raise MissingColumnError(file_path, f"{key} (line {i})")
        day = parse_date(obj["date"])
        if days and day <= days[-1]:
            raise NonMonotoneDatesError(file_path, f"line {i}: {day} after {days[-1]}")
        days.append(day)
        raw.append(obj["raw_exposure"])
        price.append(obj["price"])
        caps.append(obj["market_cap"])
        rets.append(obj["stock_return"])
    price = np.asarray(price, dtype=np.float64)
    caps = np.asarray(caps, dtype=np.float64)
    for name, arr in (("price", price), ("market_cap", caps)):
        bad = np.argwhere(~(arr > 0))
        if bad.size:
            t, j = bad[0]
            raise NonPositivePriceError(file_path, int(t) + 2, name, float(arr[t, j]))
    raw = np.asarray(raw, dtype=np.float64)
    std = standardize_panel_exposures(raw, caps, catalog, days=days)
    return StockPanel(
        trading_days=tuple(days), stocks=stocks, raw_exposure=raw, std_exposure=std,
        sector=np.asarray(head["sectors"], dtype=np.int64), price=price,
        market_cap=caps, stock_return=np.asarray(rets, dtype=np.float64), catalog=catalog,
    )


def _write_panel_jsonl(panel: StockPanel, path: str) -> None:
    file_path = os.path.join(path, PANEL_JSONL_FILE)
    with open(file_path, "w", newline="\n") as fh:
        head = {
            "stocks": list(panel.stocks),
            "sectors": panel.sector.tolist(),
            "factors": list(panel.catalog.style_factors),
        }
        fh.write(json.dumps(head, sort_keys=True) + "\n")
        for t, day in enumerate(panel.trading_days):
            obj = {
                "date": day.isoformat(),
                "raw_exposure": panel.raw_exposure[t].tolist(),
                "price": panel.price[t].tolist(),
                "market_cap": panel.market_cap[t].tolist(),
                "stock_return": panel.stock_return[t].tolist(),
            }
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Factor-return artifacts
# ---------------------------------------------------------------------------

def write_factor_returns(frm, path: str, residuals_stocks: Sequence[str] | None = None) -> None:
    """Emit factor_returns.csv and, when stock ids are given, residuals.csv."""
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "factor_returns.csv"), "w", newline="\n") as fh:
        fh.write("date," + ",".join(frm.catalog.style_factors) + "\n")
        for t, day in enumerate(frm.days):
            fh.write(day.isoformat() + "," + ",".join(_fmt(v) for v in frm.f[t]) + "\n")
    if residuals_stocks is not None:
        with open(os.path.join(path, "residuals.csv"), "w", newline="\n") as fh:
            fh.write("date,stock_id,value\n")
            for t, day in enumerate(frm.days):
                for j, sid in enumerate(residuals_stocks):
                    fh.write(f"{day.isoformat()},{sid},{_fmt(frm.residual[t, j])}\n")


def load_factor_returns_csv(path: str, catalog: FactorCatalog = DEFAULT_CATALOG):
    """Read factor_returns.csv back as (days, (T, 10) array)."""
    header, rows = _read_csv(path)
    cols = _require_columns(path, header, ["date", *catalog.style_factors])
    days = [parse_date(r[cols["date"]]) for r in rows]
    f = np.array([[float(r[cols[name]]) for name in catalog.style_factors] for r in rows])
    return days, f


# ---------------------------------------------------------------------------
# Portfolios
# ---------------------------------------------------------------------------

def load_portfolios(path: str, panel: StockPanel) -> list[PortfolioSeries]:
    """Parse portfolios.jsonl, validating against the panel's stocks and days."""
    file_path = os.path.join(path, PORTFOLIOS_FILE) if os.path.isdir(path) else path
    portfolios = []
    with open(file_path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            pid = str(obj["id"])
            entries = obj["days"]
            if len(entries) < MIN_SPAN:
                raise SpanTooShortError(pid, len(entries), MIN_SPAN)
            days = []
            for e in entries:
                day = parse_date(e["date"])
                try:
                    panel.day_index(day)
                except KeyError:
                    raise DateOutOfRangeError(pid, day) from None
                days.append(day)
            base = panel.day_index(days[0])
            for offset, day in enumerate(days):
                if panel.day_index(day) != base + offset:
                    raise NonMonotoneDatesError(
                        file_path, f"portfolio {pid}: days must be contiguous panel trading days"
                    )
            ids = sorted({sid for e in entries for sid in e["holdings"]})
            for sid in ids:
                if not panel.has_stock(sid):
                    raise UnknownStockError(sid, f"portfolio {pid}")
            col = {sid: k for k, sid in enumerate(ids)}
            shares = np.zeros((len(entries), len(ids)))
            cash = np.zeros(len(entries))
            for t, e in enumerate(entries):
                cash[t] = float(e["cash"])
                for sid, count in e["holdings"].items():
                    shares[t, col[sid]] = float(count)
            portfolios.append(
                PortfolioSeries(id=pid, days=tuple(days), stock_ids=tuple(ids),
                                shares=shares, cash=cash)
            )
    return portfolios


def write_portfolios(portfolios: Sequence[PortfolioSeries], path: str) -> None:
    file_path = os.path.join(path, PORTFOLIOS_FILE) if os.path.isdir(path) else path
    with open(file_path, "w", newline="\n") as fh:
        for p in portfolios:
            obj = {
                "id": p.id,
                "days": [
                    {
                        "date": p.days[t].isoformat(),
                        "holdings": {s: v for s, v in sorted(p.holdings_on(t).items())},
                        "cash": float(p.cash[t]),
                    }
                    for t in range(p.span)
                ],
            }
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
