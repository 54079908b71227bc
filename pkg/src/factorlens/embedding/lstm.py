"""Gated recurrent cell with manual backprop, plus the Adam optimizer.

Single-layer LSTM cell: gates i, f, g, o with sigmoid/tanh activations,
c_t = f*c + i*g, h_t = o*tanh(c_t). A boolean step mask freezes (h, c) through
padded steps, so states and gradients are exactly invariant to padded-region
contents. The decoder variant has no input weights (its per-step input is
identically zero); its state is driven purely by the recurrence from the
initial hidden state.

Everything is float64 so analytic gradients can be validated against central
finite differences at 1e-4 relative tolerance.
"""
from __future__ import annotations

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_cell(rng: np.random.Generator, input_dim: int, hidden: int) -> dict[str, np.ndarray]:
    """Uniform fan-in initialization; forget-gate bias starts at 1."""
    tensors = {}
    if input_dim > 0:
        bound = 1.0 / np.sqrt(input_dim)
        tensors["Wx"] = rng.uniform(-bound, bound, (4 * hidden, input_dim))
    bound = 1.0 / np.sqrt(hidden)
    tensors["Wh"] = rng.uniform(-bound, bound, (4 * hidden, hidden))
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0
    tensors["b"] = b
    return tensors


def cell_forward(
    cell: dict[str, np.ndarray],
    x: np.ndarray | None,
    steps: int,
    mask: np.ndarray | None = None,
    h0: np.ndarray | None = None,
    batch: int | None = None,
):
    """Run the cell for `steps` steps.

    x is (B, T, D) or None (zero inputs); mask is (B, T) or None (all valid).
    Returns (h_seq (B, T, H), h_final, cache).
    """
    Wh, b = cell["Wh"], cell["b"]
    H = Wh.shape[1]
    B = x.shape[0] if x is not None else batch
    h = np.zeros((B, H)) if h0 is None else h0
    c = np.zeros((B, H))

    zx = None
    if x is not None:
        zx = x.reshape(B * steps, -1) @ cell["Wx"].T
        zx = zx.reshape(B, steps, 4 * H)

    gates = np.empty((steps, B, 4 * H))
    c_prev = np.empty((steps, B, H))
    h_prev = np.empty((steps, B, H))
    c_tilde = np.empty((steps, B, H))
    h_seq = np.empty((B, steps, H))

    for t in range(steps):
        z = h @ Wh.T + b
        if zx is not None:
            z = z + zx[:, t]
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:])
        c_prev[t], h_prev[t] = c, h
        ct = f * c + i * g
        ht = o * np.tanh(ct)
        c_tilde[t] = ct
        gates[t] = np.concatenate([i, f, g, o], axis=1)
        if mask is not None:
            m = mask[:, t:t + 1]
            c = np.where(m, ct, c)
            h = np.where(m, ht, h)
        else:
            c, h = ct, ht
        h_seq[:, t] = h

    cache = {"x": x, "mask": mask, "gates": gates, "c_prev": c_prev,
             "h_prev": h_prev, "c_tilde": c_tilde, "steps": steps, "B": B, "H": H}
    return h_seq, h, cache


def cell_backward(
    cell: dict[str, np.ndarray],
    cache: dict,
    dh_final: np.ndarray | None = None,
    dh_seq: np.ndarray | None = None,
):
    """Backprop through time.

    dh_final is the gradient at the last step's hidden state; dh_seq (B, T, H)
    adds per-step gradients (decoder outputs). Returns (grads, dh0).
    """
    steps, B, H = cache["steps"], cache["B"], cache["H"]
    mask, gates = cache["mask"], cache["gates"]
    Wh = cell["Wh"]

    dh = np.zeros((B, H)) if dh_final is None else dh_final.copy()
    dc = np.zeros((B, H))
    dz_stack = np.empty((steps, B, 4 * H))

    for t in range(steps - 1, -1, -1):
        if dh_seq is not None:
            dh = dh + dh_seq[:, t]
        if mask is not None:
            m = mask[:, t:t + 1].astype(np.float64)
            dh_live, dc_live = m * dh, m * dc
            dh_carry, dc_carry = (1.0 - m) * dh, (1.0 - m) * dc
        else:
            dh_live, dc_live = dh, dc
            dh_carry = dc_carry = 0.0
        i = gates[t, :, :H]
        f = gates[t, :, H:2 * H]
        g = gates[t, :, 2 * H:3 * H]
        o = gates[t, :, 3 * H:]
        tc = np.tanh(cache["c_tilde"][t])
        do = dh_live * tc
        dct = dc_live + dh_live * o * (1.0 - tc * tc)
        di = dct * g
        df = dct * cache["c_prev"][t]
        dg = dct * i
        dz = np.concatenate(
            [di * i * (1.0 - i), df * f * (1.0 - f), dg * (1.0 - g * g), do * o * (1.0 - o)],
            axis=1,
        )
        dz_stack[t] = dz
        dh = dh_carry + dz @ Wh
        dc = dc_carry + dct * f

    dz_flat = dz_stack.reshape(steps * B, 4 * H)
    hp_flat = cache["h_prev"].reshape(steps * B, H)
    grads = {"Wh": dz_flat.T @ hp_flat, "b": dz_flat.sum(axis=0)}
    if cache["x"] is not None:
        x_flat = cache["x"].transpose(1, 0, 2).reshape(steps * B, -1)
        grads["Wx"] = dz_flat.T @ x_flat
    return grads, dh


class Adam:
    """Adam over a dict of parameter arrays (updates in place)."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        correct1 = 1.0 - self.beta1 ** self.t
        correct2 = 1.0 - self.beta2 ** self.t
        for key, grad in grads.items():
            if key not in self.m:
                self.m[key] = np.zeros_like(grad)
                self.v[key] = np.zeros_like(grad)
            self.m[key] = self.beta1 * self.m[key] + (1.0 - self.beta1) * grad
            self.v[key] = self.beta2 * self.v[key] + (1.0 - self.beta2) * grad * grad
            m_hat = self.m[key] / correct1
            v_hat = self.v[key] / correct2
            params[key] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
