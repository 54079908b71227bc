"""Exact t-SNE with per-point bandwidth bisection.

Conditional neighbor distributions use Gaussian kernels whose per-point
precisions beta_i are solved by bisection so each row's perplexity exp(H_i)
matches the target. The 2-D layout minimizes KL(P || Q) against the
Student-t kernel by gradient descent with momentum and per-coordinate gains,
with the joint P exaggerated for the opening iterations. The (unexaggerated)
KL objective is evaluated every iteration and returned as a history.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, PerplexityTooLargeError

PERPLEXITY_TOL = 1e-5
EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
MIN_GAIN = 0.01


@dataclass(frozen=True)
class TsneResult:
    coords: np.ndarray        # (N, 2)
    kl: float
    kl_history: np.ndarray    # per-iteration unexaggerated KL
    betas: np.ndarray         # per-point Gaussian precisions


def _squared_distances(X: np.ndarray) -> np.ndarray:
    sq = (X * X).sum(axis=1)
    d2 = sq[:, None] - 2.0 * (X @ X.T) + sq[None, :]
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _row_distribution(d: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    """Gaussian row distribution and its perplexity for one point.

    d holds squared distances to the other points (self excluded).
    """
    logits = -beta * (d - d.min())
    p = np.exp(logits)
    total = p.sum()
    p /= total
    # Shannon entropy in nats, computed stably from the logits
    h = float(np.log(total) + beta * ((d - d.min()) * p).sum())
    return p, float(np.exp(h))


def conditional_probabilities(
    X: np.ndarray, perplexity: float, tol: float = PERPLEXITY_TOL, max_iter: int = 200
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row conditional P with bandwidths bisected to the target perplexity.

    Returns (P, betas) where P[i] sums to 1 with P[i, i] = 0.
    """
    n = X.shape[0]
    d2 = _squared_distances(X)
    P = np.zeros((n, n))
    betas = np.ones(n)
    others = ~np.eye(n, dtype=bool)
    for i in range(n):
        d = d2[i][others[i]]
        beta, lo, hi = 1.0, 0.0, np.inf
        p, perp = _row_distribution(d, beta)
        for _ in range(max_iter):
            if abs(perp - perplexity) <= tol:
                break
            if perp > perplexity:   # too flat: sharpen
                lo = beta
                beta = beta * 2.0 if np.isinf(hi) else (beta + hi) / 2.0
            else:
                hi = beta
                beta = beta / 2.0 if lo == 0.0 else (beta + lo) / 2.0
            p, perp = _row_distribution(d, beta)
        P[i][others[i]] = p
        betas[i] = beta
    return P, betas


def kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    mask = P > 0
    return float((P[mask] * np.log(P[mask] / Q[mask])).sum())


def project_tsne(
    H: np.ndarray,
    perplexity: float = 30.0,
    seed: int = 0,
    iterations: int = 1000,
    learning_rate: float | None = None,
) -> TsneResult:
    """Project latents to 2-D coordinates.

    Deterministic given (H, perplexity, seed, iterations).

    Raises
    ------
    PerplexityTooLargeError
        Unless perplexity < (N - 1) / 3.
    DegenerateInputError
        If all input rows are identical.
    """
    H = np.asarray(H, dtype=np.float64)
    n = H.shape[0]
    if n < 5:
        raise DegenerateInputError(f"need at least 5 points, got {n}")
    if not perplexity < (n - 1) / 3:
        raise PerplexityTooLargeError(perplexity, n)
    if _squared_distances(H).max() == 0.0:
        raise DegenerateInputError()
    if learning_rate is None:
        learning_rate = max(50.0, n / 12.0)

    cond, betas = conditional_probabilities(H, perplexity)
    P = (cond + cond.T) / (2.0 * n)
    P = np.maximum(P, 1e-12)

    rng = np.random.default_rng(seed)
    Y = rng.normal(0.0, 1e-4, (n, 2))
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)
    kl_history = np.empty(iterations)

    for it in range(iterations):
        d2 = _squared_distances(Y)
        num = 1.0 / (1.0 + d2)
        np.fill_diagonal(num, 0.0)
        Q = np.maximum(num / num.sum(), 1e-12)

        scale = EXAGGERATION if it < EXAGGERATION_ITERS else 1.0
        W = (scale * P - Q) * num
        grad = 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)

        momentum = MOMENTUM_EARLY if it < EXAGGERATION_ITERS else MOMENTUM_LATE
        flipped = np.sign(grad) != np.sign(velocity)
        gains = np.where(flipped, gains + 0.2, gains * 0.8)
        gains = np.maximum(gains, MIN_GAIN)
        velocity = momentum * velocity - learning_rate * gains * grad
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)

        kl_history[it] = kl_divergence(P, Q)

    d2 = _squared_distances(Y)
    num = 1.0 / (1.0 + d2)
    np.fill_diagonal(num, 0.0)
    final_kl = kl_divergence(P, np.maximum(num / num.sum(), 1e-12))
    return TsneResult(coords=Y, kl=final_kl, kl_history=kl_history, betas=betas)
