"""Pure-NumPy chain recursions: the fallback backend.

All arrays are log-domain float64; -inf marks forbidden states/transitions.
The compiled backend in _kernels.pyx implements the same three signatures.

Overflow to inf and inf-inf=nan are representable outcomes here, detected
and raised as typed errors by the caller; the recursions suppress numpy's
floating-point warnings so both backends are equally silent about them.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _lse(matrix: np.ndarray, axis: int) -> np.ndarray:
    """logsumexp along one axis of a 2-D array; all--inf slices give -inf."""
    mx = matrix.max(axis=axis)
    out = np.full(mx.shape, -np.inf)
    safe = mx > -np.inf
    if np.any(safe):
        shifted = matrix - np.expand_dims(np.where(safe, mx, 0.0), axis)
        sums = np.exp(shifted, where=np.isfinite(shifted), out=np.zeros_like(shifted)).sum(axis=axis)
        out[safe] = mx[safe] + np.log(sums[safe])
    return out


def forward(start: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """log_alpha, shape (T, L); start is position 0's scores."""
    n_pos = edges.shape[0] + 1
    alpha = np.empty((n_pos, start.size))
    alpha[0] = start
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, n_pos):
            alpha[t] = _lse(alpha[t - 1][:, None] + edges[t - 1], axis=0)
    return alpha


def backward(end_mask: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """log_beta, shape (T, L); end_mask restricts the final position."""
    n_pos = edges.shape[0] + 1
    beta = np.empty((n_pos, end_mask.size))
    beta[-1] = end_mask
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(n_pos - 2, -1, -1):
            beta[t] = _lse(edges[t] + beta[t + 1][None, :], axis=1)
    return beta


def viterbi_path(start: np.ndarray, edges: np.ndarray, end_mask: np.ndarray):
    """(argmax state path, its score). Ties pick the lowest-ordered state."""
    n_pos = edges.shape[0] + 1
    n_states = start.size
    delta = start.copy()
    back = np.empty((n_pos - 1, n_states), dtype=np.int32)
    cols = np.arange(n_states)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, n_pos):
            scores = delta[:, None] + edges[t - 1]
            back[t - 1] = scores.argmax(axis=0)  # first max = lowest-ordered state
            delta = scores[back[t - 1], cols]
        final = delta + end_mask
    last = int(final.argmax())
    score = float(final[last])
    path = np.empty(n_pos, dtype=np.int32)
    path[-1] = last
    for t in range(n_pos - 2, -1, -1):
        path[t] = back[t, path[t + 1]]
    return path, score
