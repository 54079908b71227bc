"""Dataset session: loaded data, derived artifacts, and computation caches."""
from __future__ import annotations

import datetime as dt
import threading
from dataclasses import dataclass, field
from typing import Callable

from ..embedding import (
    AutoencoderParams,
    EmbedCache,
    EmbedConfig,
    EmbeddingResult,
    embed_pipeline,
    load_checkpoint,
    make_batches,
    train_autoencoder,
)
from ..embedding.batching import clip_to_period
from ..factors import attach_derived_fields, estimate_panel_factor_returns
from ..market_io import load_panel, load_portfolios
from ..panel import StockPanel
from ..portfolios import MarketIndex, PortfolioSeries, build_benchmarks


@dataclass
class AnalysisSession:
    panel: StockPanel
    portfolios: list[PortfolioSeries]
    benchmarks: tuple[MarketIndex, MarketIndex]
    factor_returns: object
    embed_cfg: EmbedConfig = field(default_factory=EmbedConfig)
    params: AutoencoderParams | None = None
    embed_cache: EmbedCache = field(default_factory=EmbedCache)
    _by_id: dict = field(default_factory=dict)
    _train_lock: threading.Lock = field(default_factory=threading.Lock)
    _period_params: dict = field(default_factory=dict)

    def __post_init__(self):
        self._by_id = {p.id: p for p in self.portfolios}

    @classmethod
    def from_dir(cls, data_dir: str, checkpoint: str | None = None,
                 embed_cfg: EmbedConfig | None = None) -> "AnalysisSession":
        panel = load_panel(data_dir)
        portfolios = attach_derived_fields(load_portfolios(data_dir, panel), panel)
        benchmarks = build_benchmarks(panel)
        frm = estimate_panel_factor_returns(panel)
        params = load_checkpoint(checkpoint) if checkpoint else None
        return cls(
            panel=panel, portfolios=portfolios, benchmarks=benchmarks,
            factor_returns=frm, embed_cfg=embed_cfg or EmbedConfig(), params=params,
        )

    # -- periods -------------------------------------------------------------

    def full_period(self) -> tuple[dt.date, dt.date]:
        return self.panel.trading_days[0], self.panel.trading_days[-1]

    def snap_period(self, start: dt.date | None, end: dt.date | None) -> tuple[dt.date, dt.date] | None:
        """Snap [start, end] inward to trading days; None when empty or inverted."""
        lo, hi = self.full_period()
        start = start or lo
        end = end or hi
        if start > end:
            return None
        i0, i1 = self.panel.clip_days(start, end)
        if i1 <= i0:
            return None
        return self.panel.trading_days[i0], self.panel.trading_days[i1 - 1]

    def get_portfolio(self, pid: str) -> PortfolioSeries | None:
        return self._by_id.get(pid)

    # -- embedding -----------------------------------------------------------

    def qualifying(self, period: tuple[dt.date, dt.date]) -> list[PortfolioSeries]:
        return [p for p in self.portfolios if clip_to_period(p, *period) is not None]

    def embed_inputs(self, period) -> list:
        return self.qualifying(period) + [b for b in self.benchmarks
                                          if clip_to_period(b, *period) is not None]

    def ensure_params(self, progress: Callable[[float], None] | None = None) -> AutoencoderParams:
        """Train once on the full-range portfolio batches (benchmarks excluded)."""
        with self._train_lock:
            if self.params is not None and self.params.trained:
                return self.params
            batches, _ = make_batches(
                self.portfolios, self.full_period(), self.embed_cfg.batch_size
            )
            cfg = self.embed_cfg

            def on_epoch(epoch, total, loss):
                if progress is not None:
                    progress(0.7 * epoch / total)

            self.params = train_autoencoder(
                batches, epochs=cfg.epochs, lr=cfg.lr, seed=cfg.seed,
                hidden=cfg.hidden, progress=on_epoch,
            )
            return self.params

    def compute_embedding(self, period, progress: Callable[[float], None] | None = None) -> EmbeddingResult:
        """Re-encode the period's sequences under the session weights and project.

        Benchmarks are encoded with the frozen weights but never trained on;
        with ``retrain`` set, fresh weights are fit per period on the period's
        portfolio batches first.
        """
        import dataclasses

        if self.embed_cfg.retrain:
            cfg = self.embed_cfg
            with self._train_lock:
                params = self._period_params.get(period)
                if params is None:
                    batches, _ = make_batches(self.qualifying(period), period, cfg.batch_size)

                    def on_epoch(epoch, total, loss):
                        if progress is not None:
                            progress(0.7 * epoch / total)

                    params = train_autoencoder(
                        batches, epochs=cfg.epochs, lr=cfg.lr, seed=cfg.seed,
                        hidden=cfg.hidden, progress=on_epoch,
                    )
                    self._period_params[period] = params
        else:
            params = self.ensure_params(progress)

        def tail_progress(fraction):
            if progress is not None:
                progress(0.7 + 0.3 * fraction)

        result, _ = embed_pipeline(
            self.embed_inputs(period), period,
            dataclasses.replace(self.embed_cfg, retrain=False),
            params=params, cache=self.embed_cache, progress=tail_progress,
        )
        return result

    def cached_embedding(self, period) -> EmbeddingResult | None:
        import dataclasses

        from ..embedding.pipeline import cache_key, data_fingerprint

        params = self._period_params.get(period) if self.embed_cfg.retrain else self.params
        if params is None or not params.trained:
            return None
        inputs = self.embed_inputs(period)
        if not inputs:
            return None
        key = cache_key(period, dataclasses.replace(self.embed_cfg, retrain=False),
                        data_fingerprint(inputs), params)
        return self.embed_cache.get(key)

    # -- analytics -----------------------------------------------------------

    def window_cumulative(self, series_days, daily, period) -> list[tuple[dt.date, float]]:
        """Cumulative return over the overlap, rebased to 0 on its first day."""
        start, end = period
        idx = [i for i, d in enumerate(series_days) if start <= d <= end]
        if not idx:
            return []
        out = [(series_days[idx[0]], 0.0)]
        acc = 1.0
        for i in idx[1:]:
            acc *= 1.0 + float(daily[i])
            out.append((series_days[i], acc - 1.0))
        return out
