"""Batch -> train/reuse -> encode -> project pipeline with result caching."""
from __future__ import annotations

import datetime as dt
import hashlib
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .autoencoder import (
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN,
    DEFAULT_LR,
    AutoencoderParams,
    encode_batches,
    train_autoencoder,
)
from .batching import make_batches
from .tsne import project_tsne


@dataclass(frozen=True)
class EmbedConfig:
    epochs: int = DEFAULT_EPOCHS
    lr: float = DEFAULT_LR
    seed: int = 0
    hidden: int = DEFAULT_HIDDEN
    batch_size: int = 64
    perplexity: float = 30.0
    tsne_iterations: int = 1000
    retrain: bool = False

    def digest(self) -> str:
        parts = (self.epochs, self.lr, self.seed, self.hidden, self.batch_size,
                 self.perplexity, self.tsne_iterations, self.retrain)
        return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class EmbeddingResult:
    ids: tuple[str, ...]
    H: np.ndarray             # (N, hidden) latents
    C: np.ndarray             # (N, 2) coordinates
    tsne_kl: float
    seed: int
    period: tuple[dt.date, dt.date]
    excluded: tuple[dict, ...]
    loss_history: tuple[float, ...]
    kl_history: np.ndarray

    def coords_of(self, pid: str) -> np.ndarray:
        return self.C[self.ids.index(pid)]


class EmbedCache:
    """Keyed result store, safe for concurrent readers with exclusive writers."""

    def __init__(self):
        self._store: dict[str, EmbeddingResult] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> EmbeddingResult | None:
        with self._lock:
            result = self._store.get(key)
            if result is None:
                self.misses += 1
            else:
                self.hits += 1
            return result

    def put(self, key: str, result: EmbeddingResult) -> None:
        with self._lock:
            self._store[key] = result


def data_fingerprint(portfolios: Sequence) -> str:
    """Order-insensitive digest of ids, spans, and record contents."""
    digests = []
    for p in portfolios:
        pid = getattr(p, "id", None) or getattr(p, "name")
        h = hashlib.sha256()
        h.update(pid.encode())
        h.update(p.days[0].isoformat().encode())
        h.update(p.days[-1].isoformat().encode())
        h.update(np.ascontiguousarray(p.record).tobytes())
        digests.append(h.hexdigest())
    joined = "".join(sorted(digests))
    return hashlib.sha256(joined.encode()).hexdigest()[:16]


def cache_key(period: tuple[dt.date, dt.date], cfg: EmbedConfig, fingerprint: str,
              params: AutoencoderParams | None) -> str:
    trained_tag = "fresh" if params is None or cfg.retrain else f"ckpt-{_params_digest(params)}"
    return f"{period[0].isoformat()}:{period[1].isoformat()}:{cfg.digest()}:{fingerprint}:{trained_tag}"


def _params_digest(params: AutoencoderParams) -> str:
    h = hashlib.sha256()
    for name in sorted(params.tensors):
        h.update(params.tensors[name].tobytes())
    return h.hexdigest()[:16]


def embed_pipeline(
    portfolios: Sequence,
    period: tuple[dt.date, dt.date],
    cfg: EmbedConfig,
    params: AutoencoderParams | None = None,
    cache: EmbedCache | None = None,
    progress: Callable[[float], None] | None = None,
) -> tuple[EmbeddingResult, AutoencoderParams]:
    """Full embedding for the period; served from cache when keys match.

    With trained ``params`` and ``retrain`` unset, sequences clipped to the
    period are re-encoded under the cached weights; otherwise the autoencoder
    is trained on the clipped batches first. Returns (result, params-used).
    """
    fingerprint = data_fingerprint(portfolios)
    key = cache_key(period, cfg, fingerprint, params)
    if cache is not None:
        cached = cache.get(key)
        if cached is not None:
            return cached, params

    batches, excluded = make_batches(portfolios, period, cfg.batch_size)

    if params is None or cfg.retrain or not params.trained:
        def training_progress(epoch, total, loss):
            if progress is not None:
                progress(0.8 * epoch / total)

        params = train_autoencoder(
            batches, epochs=cfg.epochs, lr=cfg.lr, seed=cfg.seed,
            hidden=cfg.hidden, progress=training_progress,
        )
    if progress is not None:
        progress(0.8)

    latents = encode_batches(batches, params)
    ids = tuple(sorted(latents))
    H = np.array([latents[i] for i in ids])
    tsne = project_tsne(
        H, perplexity=cfg.perplexity, seed=cfg.seed, iterations=cfg.tsne_iterations
    )
    if progress is not None:
        progress(1.0)

    result = EmbeddingResult(
        ids=ids, H=H, C=tsne.coords, tsne_kl=tsne.kl, seed=cfg.seed,
        period=period, excluded=tuple(excluded),
        loss_history=params.loss_history, kl_history=tsne.kl_history,
    )
    if cache is not None:
        cache.put(key, result)
    return result, params
