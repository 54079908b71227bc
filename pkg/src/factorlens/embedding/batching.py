"""Padding and masking of variable-length record sequences into batches."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..catalog import RECORD_DIM
from ..errors import DimensionMismatchError, EmptySelectionError
from ..portfolios import MAX_SPAN

MIN_OVERLAP = 20


@dataclass(frozen=True)
class SequenceBatch:
    """Zero-padded (B, T, 39) block with validity mask and true lengths."""

    ids: tuple[str, ...]
    data: np.ndarray      # (B, T, 39), zero where mask is False
    mask: np.ndarray      # (B, T) bool
    lengths: np.ndarray   # (B,)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        lengths = np.asarray(self.lengths, dtype=np.int64)
        b, t, d = data.shape
        if d != RECORD_DIM:
            raise DimensionMismatchError("<batch>", f"record dim {d} != {RECORD_DIM}")
        if mask.shape != (b, t) or lengths.shape != (b,):
            raise DimensionMismatchError("<batch>", "mask/lengths shape mismatch")
        expected = np.arange(t)[None, :] < lengths[:, None]
        if not np.array_equal(mask, expected):
            raise DimensionMismatchError("<batch>", "mask must be True exactly for t < length")
        if np.abs(data[~mask]).max(initial=0.0) != 0.0:
            raise DimensionMismatchError("<batch>", "data must be zero where mask is False")
        for name, arr in (("data", data), ("mask", mask), ("lengths", lengths)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "ids", tuple(self.ids))

    @property
    def n_valid_elements(self) -> int:
        return int(self.lengths.sum()) * RECORD_DIM


def _series_fields(p) -> tuple[str, tuple, np.ndarray]:
    pid = getattr(p, "id", None) or getattr(p, "name")
    if p.record is None:
        raise DimensionMismatchError(pid, "derived record required before batching")
    return pid, p.days, p.record


def clip_to_period(p, start: dt.date, end: dt.date) -> np.ndarray | None:
    """Record rows inside [start, end]; None when the overlap is too short.

    Overlaps beyond the maximum span (benchmarks over long panels) keep the
    most recent MAX_SPAN days.
    """
    _, days, record = _series_fields(p)
    lo = next((i for i, d in enumerate(days) if d >= start), len(days))
    hi = next((i for i in range(len(days) - 1, -1, -1) if days[i] <= end), -1) + 1
    if hi - lo < MIN_OVERLAP:
        return None
    if hi - lo > MAX_SPAN:
        lo = hi - MAX_SPAN
    return record[lo:hi]


def make_batches(
    portfolios: Sequence,
    period: tuple[dt.date, dt.date],
    batch_size: int = 64,
) -> tuple[list[SequenceBatch], list[dict]]:
    """Clip sequences to the period and bucket them by similar length.

    Sequences overlapping the period by fewer than 20 days are excluded and
    listed in the returned report. Qualifying sequences are sorted by
    (length, id) and chunked, limiting padding waste within each batch.
    """
    start, end = period
    kept: list[tuple[int, str, np.ndarray]] = []
    excluded: list[dict] = []
    for p in portfolios:
        pid, days, _ = _series_fields(p)
        clipped = clip_to_period(p, start, end)
        if clipped is None:
            overlap = sum(1 for d in days if start <= d <= end)
            excluded.append({"id": pid, "overlap_days": overlap})
            continue
        kept.append((len(clipped), pid, clipped))
    if not kept:
        raise EmptySelectionError()
    kept.sort(key=lambda item: (item[0], item[1]))

    batches = []
    for chunk_start in range(0, len(kept), batch_size):
        chunk = kept[chunk_start:chunk_start + batch_size]
        max_len = max(length for length, _, _ in chunk)
        data = np.zeros((len(chunk), max_len, RECORD_DIM))
        lengths = np.array([length for length, _, _ in chunk], dtype=np.int64)
        for i, (length, _, rec) in enumerate(chunk):
            data[i, :length] = rec
        mask = np.arange(max_len)[None, :] < lengths[:, None]
        batches.append(
            SequenceBatch(
                ids=tuple(pid for _, pid, _ in chunk),
                data=data, mask=mask, lengths=lengths,
            )
        )
    return batches, excluded
