"""Sequence autoencoder over 39-dim portfolio records.

The encoder LSTM consumes each masked sequence; its final hidden state (frozen
at the last valid step) is the 50-dim latent. The decoder LSTM starts from the
latent as its initial hidden state, receives zero inputs, and a linear head
maps its hidden states back to 39-dim reconstructions. The loss is the squared
reconstruction error over valid timesteps, averaged per valid element, so it
is invariant both to padding contents and to sequence length.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from ..errors import DivergenceError, UntrainedModelError
from .batching import SequenceBatch, make_batches
from .lstm import Adam, cell_backward, cell_forward, init_cell

DEFAULT_HIDDEN = 50
DEFAULT_EPOCHS = 200
DEFAULT_LR = 1e-3
_BLOWUP_FACTOR = 1e6

TENSOR_NAMES = ("enc_Wx", "enc_Wh", "enc_b", "dec_Wh", "dec_b", "out_W", "out_b")


@dataclass(frozen=True)
class AutoencoderParams:
    tensors: dict[str, np.ndarray]
    hidden: int
    input_dim: int
    seed: int
    trained: bool = False
    loss_history: tuple[float, ...] = ()

    def __post_init__(self):
        for name in TENSOR_NAMES:
            if name not in self.tensors:
                raise KeyError(f"missing tensor {name}")
        for arr in self.tensors.values():
            if not np.isfinite(arr).all():
                raise ValueError("non-finite parameter tensor")
            arr.setflags(write=False)


def _enc(tensors: dict) -> dict:
    return {"Wx": tensors["enc_Wx"], "Wh": tensors["enc_Wh"], "b": tensors["enc_b"]}


def _dec(tensors: dict) -> dict:
    return {"Wh": tensors["dec_Wh"], "b": tensors["dec_b"]}


def init_tensors(seed: int, input_dim: int, hidden: int) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    enc = init_cell(rng, input_dim, hidden)
    dec = init_cell(rng, 0, hidden)
    bound = 1.0 / np.sqrt(hidden)
    return {
        "enc_Wx": enc["Wx"], "enc_Wh": enc["Wh"], "enc_b": enc["b"],
        "dec_Wh": dec["Wh"], "dec_b": dec["b"],
        "out_W": rng.uniform(-bound, bound, (input_dim, hidden)),
        "out_b": np.zeros(input_dim),
    }


def batch_loss(tensors: dict, batch: SequenceBatch) -> float:
    loss, _ = _forward(tensors, batch)
    return loss


def _forward(tensors: dict, batch: SequenceBatch):
    x, mask = batch.data, batch.mask
    B, T, D = x.shape
    _, latent, enc_cache = cell_forward(_enc(tensors), x, T, mask=mask)
    dec_h, _, dec_cache = cell_forward(_dec(tensors), None, T, h0=latent, batch=B)
    x_hat = dec_h.reshape(B * T, -1) @ tensors["out_W"].T + tensors["out_b"]
    x_hat = x_hat.reshape(B, T, D)
    diff = (x_hat - x) * mask[:, :, None]
    n = batch.n_valid_elements
    loss = float((diff * diff).sum() / n)
    return loss, (diff, n, dec_h, enc_cache, dec_cache)


def loss_and_grads(tensors: dict, batch: SequenceBatch) -> tuple[float, dict[str, np.ndarray]]:
    """Masked reconstruction loss and its gradient for every parameter block."""
    loss, (diff, n, dec_h, enc_cache, dec_cache) = _forward(tensors, batch)
    B, T, D = diff.shape
    H = dec_h.shape[2]
    dx_hat = (2.0 / n) * diff
    flat_dx = dx_hat.reshape(B * T, D)
    flat_h = dec_h.reshape(B * T, H)
    grads = {
        "out_W": flat_dx.T @ flat_h,
        "out_b": flat_dx.sum(axis=0),
    }
    dh_seq = dx_hat @ tensors["out_W"]
    dec_grads, dlatent = cell_backward(_dec(tensors), dec_cache, dh_seq=dh_seq)
    grads["dec_Wh"], grads["dec_b"] = dec_grads["Wh"], dec_grads["b"]
    enc_grads, _ = cell_backward(_enc(tensors), enc_cache, dh_final=dlatent)
    grads["enc_Wx"], grads["enc_Wh"], grads["enc_b"] = (
        enc_grads["Wx"], enc_grads["Wh"], enc_grads["b"],
    )
    return loss, grads


def train_autoencoder(
    batches: Sequence[SequenceBatch],
    epochs: int = DEFAULT_EPOCHS,
    lr: float = DEFAULT_LR,
    seed: int = 0,
    hidden: int = DEFAULT_HIDDEN,
    progress: Callable[[int, int, float], None] | None = None,
) -> AutoencoderParams:
    """Adam-train the autoencoder; identical seeds give identical weights.

    Raises DivergenceError when the loss goes non-finite or blows up by a
    factor of 1e6 over the first epoch's level.
    """
    if not batches:
        raise ValueError("no batches to train on")
    if lr <= 0:
        raise ValueError("lr must be > 0")
    input_dim = batches[0].data.shape[2]
    tensors = {k: v.copy() for k, v in init_tensors(seed, input_dim, hidden).items()}
    rng = np.random.default_rng(seed)
    adam = Adam(lr=lr)
    history = []
    ceiling = None
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(batches))
        sq_sum = 0.0
        n_sum = 0
        for b in order:
            batch = batches[b]
            loss, grads = loss_and_grads(tensors, batch)
            if not np.isfinite(loss) or (ceiling is not None and loss > ceiling):
                raise DivergenceError(epoch, lr)
            adam.step(tensors, grads)
            sq_sum += loss * batch.n_valid_elements
            n_sum += batch.n_valid_elements
        epoch_loss = sq_sum / n_sum
        if ceiling is None:
            ceiling = _BLOWUP_FACTOR * (epoch_loss + 1.0)
        history.append(epoch_loss)
        if progress is not None:
            progress(epoch, epochs, epoch_loss)
    return AutoencoderParams(
        tensors=tensors, hidden=hidden, input_dim=input_dim, seed=seed,
        trained=True, loss_history=tuple(history),
    )


def encode_batches(batches: Sequence[SequenceBatch], params: AutoencoderParams) -> dict[str, np.ndarray]:
    """Latent vector per sequence id; padding beyond a length never matters."""
    if not params.trained:
        raise UntrainedModelError()
    latents: dict[str, np.ndarray] = {}
    for batch in batches:
        _, final, _ = cell_forward(
            _enc(params.tensors), batch.data, batch.data.shape[1], mask=batch.mask
        )
        for row, pid in enumerate(batch.ids):
            latents[pid] = final[row]
    return latents


def encode(portfolios: Sequence, params: AutoencoderParams, period=None,
           batch_size: int = 64) -> tuple[list[str], np.ndarray]:
    """Latents for the given series (full spans unless a period is given).

    Returns ids in input order with the matching (N, hidden) latent matrix.
    """
    if not params.trained:
        raise UntrainedModelError()
    if period is None:
        all_days = [d for p in portfolios for d in (p.days[0], p.days[-1])]
        period = (min(all_days), max(all_days))
    batches, _ = make_batches(portfolios, period, batch_size)
    latents = encode_batches(batches, params)
    ids = [getattr(p, "id", None) or getattr(p, "name") for p in portfolios if
           (getattr(p, "id", None) or getattr(p, "name")) in latents]
    return ids, np.array([latents[i] for i in ids])


# ---------------------------------------------------------------------------
# Checkpoints: one JSON manifest line, then raw float64 tensor bytes in
# manifest order. Byte-deterministic for identical parameters.
# ---------------------------------------------------------------------------

CHECKPOINT_VERSION = 1


def save_checkpoint(params: AutoencoderParams, path: str) -> None:
    manifest = {
        "format": "factorlens-autoencoder",
        "version": CHECKPOINT_VERSION,
        "hidden": params.hidden,
        "input_dim": params.input_dim,
        "seed": params.seed,
        "trained": params.trained,
        "loss_history": list(params.loss_history),
        "tensors": {name: list(params.tensors[name].shape) for name in TENSOR_NAMES},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(manifest, sort_keys=True).encode() + b"\n")
        for name in TENSOR_NAMES:
            fh.write(np.ascontiguousarray(params.tensors[name], dtype=np.float64).tobytes())


def load_checkpoint(path: str) -> AutoencoderParams:
    with open(path, "rb") as fh:
        manifest = json.loads(fh.readline().decode())
        if manifest.get("format") != "factorlens-autoencoder":
            raise ValueError(f"{path} is not an autoencoder checkpoint")
        if manifest["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {manifest['version']}")
        tensors = {}
        for name in TENSOR_NAMES:
            shape = tuple(manifest["tensors"][name])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            tensors[name] = np.frombuffer(buf, dtype=np.float64).reshape(shape).copy()
    return AutoencoderParams(
        tensors=tensors,
        hidden=manifest["hidden"],
        input_dim=manifest["input_dim"],
        seed=manifest["seed"],
        trained=manifest["trained"],
        loss_history=tuple(manifest["loss_history"]),
    )
