"""Independent reference implementations used to pin expected values.

The enumeration oracle scores every possible state path of a trellis by
brute force; the finite-difference oracle numerically differentiates any
scalar function. Both are deliberately simple and O(L^T) / O(K) slow.
"""

from __future__ import annotations

import numpy as np


def all_paths(n_positions: int, n_states: int) -> np.ndarray:
    """Every state path, shape (n_states**n_positions, n_positions)."""
    count = n_states**n_positions
    paths = np.empty((count, n_positions), dtype=np.int64)
    for t in range(n_positions):
        reps = n_states ** (n_positions - 1 - t)
        tiles = n_states**t
        paths[:, t] = np.tile(np.repeat(np.arange(n_states), reps), tiles)
    return paths


def path_scores(paths: np.ndarray, start, edges, end_mask) -> np.ndarray:
    """Left-to-right accumulated scores, matching the decoder's sum order."""
    scores = start[paths[:, 0]].astype(np.float64)
    for t in range(1, paths.shape[1]):
        scores = scores + edges[t - 1, paths[:, t - 1], paths[:, t]]
    return scores + end_mask[paths[:, -1]]


def enumerate_log_z(start, edges, end_mask) -> float:
    n_pos = edges.shape[0] + 1
    scores = path_scores(all_paths(n_pos, start.size), start, edges, end_mask)
    mx = scores.max()
    if not np.isfinite(mx):
        return -np.inf
    return float(mx + np.log(np.exp(scores - mx).sum()))


def enumerate_marginals(start, edges, end_mask):
    """(node marginals (T, L), edge marginals (T-1, L, L)) by enumeration."""
    n_pos = edges.shape[0] + 1
    n_states = start.size
    paths = all_paths(n_pos, n_states)
    scores = path_scores(paths, start, edges, end_mask)
    mx = scores.max()
    weights = np.exp(scores - mx)
    weights /= weights.sum()
    node = np.empty((n_pos, n_states))
    for t in range(n_pos):
        node[t] = np.bincount(paths[:, t], weights=weights, minlength=n_states)
    edge = np.empty((n_pos - 1, n_states, n_states))
    for t in range(1, n_pos):
        flat = paths[:, t - 1] * n_states + paths[:, t]
        edge[t - 1] = np.bincount(flat, weights=weights, minlength=n_states**2).reshape(
            n_states, n_states
        )
    return node, edge


def enumerate_viterbi(start, edges, end_mask):
    """(best path, best score) under the decoder's documented tie-break.

    Among paths achieving the maximal score, returns the one whose reversed
    state tuple is lexicographically smallest (the lower-ordered state wins
    at every backtrack decision).
    """
    n_pos = edges.shape[0] + 1
    paths = all_paths(n_pos, start.size)
    scores = path_scores(paths, start, edges, end_mask)
    best = scores.max()
    optimal = paths[scores == best]
    # np.lexsort uses the LAST key as primary, so column order 0..T-1
    # sorts by the final state first -- reversed-path lexicographic order.
    order = np.lexsort(tuple(optimal[:, t] for t in range(n_pos)))
    return optimal[order[0]].astype(np.int32), float(best)


def fd_gradient(fun, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function."""
    grad = np.empty_like(x)
    for j in range(x.size):
        bump = np.zeros_like(x)
        bump[j] = step
        grad[j] = (fun(x + bump) - fun(x - bump)) / (2.0 * step)
    return grad


def max_relative_error(analytic: np.ndarray, reference: np.ndarray, floor: float = 1e-3) -> float:
    denom = np.maximum(np.abs(reference), floor)
    return float((np.abs(analytic - reference) / denom).max(initial=0.0))
