"""Exact linear-chain inference: trellis construction, forward-backward,
marginals, sequence log-probability, and Viterbi decoding.

A compiled extension implements the inner recursions when available; set
TMCRF_BACKEND=python or =cython to force a backend (the default prefers the
compiled one and falls back silently).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels_py
from .errors import InfeasibleTopologyError, NumericalFailureError
from .features import LabelContexts, RecordFeatures, edge_scores, node_scores
from .states import StateTopology, check_path, project

_FORCED = os.environ.get("TMCRF_BACKEND", "")
if _FORCED == "python":
    _impl = _kernels_py
elif _FORCED == "cython":
    from . import _kernels as _impl  # raises if the extension was not built
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py


def backend_name() -> str:
    """'cython' when the compiled kernels are active, else 'python'."""
    return _impl.BACKEND


def get_backends() -> dict[str, object]:
    """All importable kernel backends, for benchmarks and tests."""
    out: dict[str, object] = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out


@dataclass
class Trellis:
    """Log-domain potentials: start scores (L,), edge scores (T-1, L, L),
    and the end-state mask (L,). Forbidden entries are -inf."""

    start: np.ndarray
    edges: np.ndarray
    end_mask: np.ndarray

    @property
    def n_positions(self) -> int:
        return self.edges.shape[0] + 1

    @property
    def n_states(self) -> int:
        return self.start.size


@dataclass
class ForwardBackwardResult:
    log_alpha: np.ndarray
    log_beta: np.ndarray
    log_Z: float


def trellis_from_features(
    rf: RecordFeatures,
    lam: np.ndarray,
    topo: StateTopology,
    contexts: LabelContexts,
) -> Trellis:
    """Assemble the trellis from flattened feature occurrences.

    Unigram scores for position t ride on the incoming edges (t-1 -> t);
    position 0's ride on the start vector.
    """
    unary = node_scores(rf, lam, contexts)
    start = topo.start_log + unary[0]
    n = rf.T
    n_states = topo.n_states
    if n > 1:
        edges = np.broadcast_to(topo.trans_log, (n - 1, n_states, n_states)) + unary[1:, None, :]
        pair = edge_scores(rf, lam, contexts)
        if pair is not None:
            edges = edges + pair
        edges = np.ascontiguousarray(edges)
    else:
        edges = np.empty((0, n_states, n_states))
    return Trellis(start=np.ascontiguousarray(start), edges=edges, end_mask=topo.end_log)


def forward_backward(trellis: Trellis) -> ForwardBackwardResult:
    log_alpha = _impl.forward(trellis.start, trellis.edges)
    log_beta = _impl.backward(trellis.end_mask, trellis.edges)
    log_z = _logsumexp_1d(log_alpha[-1] + trellis.end_mask)
    if np.isnan(log_z):
        raise NumericalFailureError("", "partition function is not a number")
    if log_z == np.inf:
        raise NumericalFailureError("", "partition function overflowed")
    if log_z == -np.inf:
        raise InfeasibleTopologyError("no allowed path has finite score")
    return ForwardBackwardResult(log_alpha=log_alpha, log_beta=log_beta, log_Z=float(log_z))


def marginals(fb: ForwardBackwardResult, trellis: Trellis) -> tuple[np.ndarray, np.ndarray]:
    """(node marginals (T, L), edge marginals (T-1, L, L))."""
    node = np.exp(_safe_sub(fb.log_alpha + fb.log_beta, fb.log_Z))
    joint = (
        fb.log_alpha[:-1, :, None] + trellis.edges + fb.log_beta[1:, None, :]
    )
    edge = np.exp(_safe_sub(joint, fb.log_Z))
    return node, edge


def _safe_sub(arr: np.ndarray, log_z: float) -> np.ndarray:
    out = arr - log_z
    out[~np.isfinite(arr)] = -np.inf
    return out


def _logsumexp_1d(v: np.ndarray) -> float:
    mx = v.max() if v.size else -np.inf
    if np.isnan(mx):
        return float("nan")
    if np.isinf(mx):
        return float(mx)  # -inf: no mass at all; +inf: upstream overflow
    return float(mx + np.log(np.exp(v - mx).sum()))


def path_score(trellis: Trellis, path: np.ndarray) -> float:
    """Unnormalized log score of a state path, summed left to right.

    Matches the decoder's accumulation order exactly, so a Viterbi path's
    score compares bit-for-bit.
    """
    score = float(trellis.start[path[0]])
    for t in range(1, path.size):
        score += trellis.edges[t - 1, path[t - 1], path[t]]
    score += trellis.end_mask[path[-1]]
    return float(score)


def sequence_log_prob(trellis: Trellis, path, topo: StateTopology, record_id: str = "") -> float:
    """log p(path | x) = path score - log Z; the path must be topology-valid."""
    arr = np.asarray(path, dtype=np.int64)
    check_path(arr, topo, record_id)
    fb = forward_backward(trellis)
    return path_score(trellis, arr) - fb.log_Z


def viterbi(trellis: Trellis, topo: StateTopology) -> tuple[np.ndarray, str, float]:
    """(state path, projected binary labels, path score)."""
    path, score = _impl.viterbi_path(trellis.start, trellis.edges, trellis.end_mask)
    if np.isnan(score):
        raise NumericalFailureError("", "decoder score is not a number")
    if score == np.inf:
        raise NumericalFailureError("", "decoder score overflowed")
    if score == -np.inf:
        raise InfeasibleTopologyError("no allowed path has finite score")
    return path, project(path, topo), float(score)


def posterior_helix(fb: ForwardBackwardResult, topo: StateTopology) -> np.ndarray:
    """Per-position P(binary label = 1 | x)."""
    node = np.exp(_safe_sub(fb.log_alpha + fb.log_beta, fb.log_Z))
    return node[:, topo.labels == 1].sum(axis=1)
