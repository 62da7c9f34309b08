"""Penalized maximum-likelihood training of the chain model with L-BFGS.

The objective (maximized) is

    L(lambda) = sum_records [ score(gold) - log Z(x) ] - ||lambda||^2 / (2 sigma^2)

optimized by scipy's L-BFGS-B with a strong-Wolfe line search; convergence is
declared when the gradient infinity-norm drops below epsilon.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .chain import forward_backward, marginals, trellis_from_features
from .config import ExperimentConfig, TrainConfig
from .errors import (
    EmptyTrainingError,
    InfeasibleTopologyError,
    MissingGoldError,
    NumericalFailureError,
)
from .features import (
    LabelContexts,
    RecordFeatures,
    accumulate_expectations,
    build_index,
    extract,
    gold_counts,
)
from .model import CrfModel
from .sequence import Dataset
from .states import StateTopology, topology_for

__all__ = [
    "TrainConfig",
    "TrainReport",
    "TrainingProblem",
    "empirical_expectations",
    "train",
]


@dataclass
class TrainReport:
    iterations: int
    final_objective: float
    final_grad_norm: float
    trace: list[tuple[int, float, float]]  # (iteration, objective, grad inf-norm)

    def render_tsv(self) -> str:
        lines = ["iteration\tobjective\tgrad_inf_norm"]
        for it, obj, gnorm in self.trace:
            lines.append(f"{it}\t{obj!r}\t{gnorm!r}")
        return "\n".join(lines) + "\n"


def _extract_all(
    train_data: Dataset,
    index,
    config: ExperimentConfig,
    topo: StateTopology,
    contexts: LabelContexts,
) -> list[RecordFeatures]:
    out = []
    for record in train_data:
        if record.gold is None:
            raise MissingGoldError(record.id)
        out.append(extract(record, index, config.features, topo, contexts))
    return out


def empirical_expectations(train_data: Dataset, index, config: ExperimentConfig) -> np.ndarray:
    """Gold feature counts summed over the training set (length K)."""
    topo = topology_for(config.resolve_topology())
    contexts = LabelContexts(topo)
    total = np.zeros(index.K)
    for rf in _extract_all(train_data, index, config, topo, contexts):
        total += gold_counts(rf, index.K)
    return total


class TrainingProblem:
    """Cached per-record feature occurrences plus objective/gradient evaluation.

    deterministic=True accumulates records in dataset order (bit-reproducible);
    otherwise records are fanned out across threads and merged in completion
    order, which may differ in the last float bits.
    """

    def __init__(
        self,
        train_data: Dataset,
        config: ExperimentConfig,
        threads: int = 1,
        deterministic: bool = True,
    ):
        if len(train_data) == 0:
            raise EmptyTrainingError("training dataset has no records")
        self.config = config
        self.topo = topology_for(config.resolve_topology())
        self.contexts = LabelContexts(self.topo)
        self.index = build_index(train_data, config.features, self.topo)
        self.record_ids = [rec.id for rec in train_data]
        self.features = _extract_all(train_data, self.index, config, self.topo, self.contexts)
        self.empirical = np.zeros(self.index.K)
        for rf in self.features:
            self.empirical += gold_counts(rf, self.index.K)
        self.threads = max(1, threads)
        self.deterministic = deterministic

    @property
    def K(self) -> int:
        return self.index.K

    def _record_terms(self, i: int, lam: np.ndarray) -> tuple[float, np.ndarray]:
        """(log Z, model expectation vector) of record i at weights lam."""
        rf = self.features[i]
        trellis = trellis_from_features(rf, lam, self.topo, self.contexts)
        try:
            fb = forward_backward(trellis)
        except (InfeasibleTopologyError, NumericalFailureError) as exc:
            # both topologies admit a path for every length, so a failure
            # here can only be arithmetic overflow at extreme weights
            raise NumericalFailureError(self.record_ids[i], str(exc)) from None
        node, edge = marginals(fb, trellis)
        expectation = np.zeros(self.index.K)
        accumulate_expectations(rf, node, edge, self.contexts, expectation)
        if not (math.isfinite(fb.log_Z) and np.all(np.isfinite(expectation))):
            raise NumericalFailureError(self.record_ids[i], "non-finite inference result")
        return fb.log_Z, expectation

    def objective_and_gradient(self, lam: np.ndarray) -> tuple[float, np.ndarray]:
        objective = float(lam @ self.empirical)
        gradient = self.empirical.copy()

        if self.threads > 1 and not self.deterministic:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                futures = [
                    pool.submit(self._record_terms, i, lam) for i in range(len(self.features))
                ]
                for fut in as_completed(futures):
                    log_z, expectation = fut.result()
                    objective -= log_z
                    gradient -= expectation
        else:
            for i in range(len(self.features)):
                log_z, expectation = self._record_terms(i, lam)
                objective -= log_z
                gradient -= expectation

        sigma2 = self.config.train.sigma2
        if math.isfinite(sigma2):
            objective -= float(lam @ lam) / (2.0 * sigma2)
            gradient -= lam / sigma2
        if not (math.isfinite(objective) and np.all(np.isfinite(gradient))):
            raise NumericalFailureError("", "non-finite objective or gradient")
        return objective, gradient


def train(
    train_data: Dataset,
    config: ExperimentConfig,
    threads: int = 1,
    deterministic: bool = True,
) -> tuple[CrfModel, TrainReport]:
    problem = TrainingProblem(train_data, config, threads=threads, deterministic=deterministic)
    tc = config.train

    best = {"objective": -math.inf, "lam": np.zeros(problem.K)}
    memo: dict[bytes, tuple[float, float]] = {}

    def negated(lam: np.ndarray) -> tuple[float, np.ndarray]:
        objective, gradient = problem.objective_and_gradient(lam)
        if objective > best["objective"]:
            best["objective"] = objective
            best["lam"] = lam.copy()
        memo[lam.tobytes()] = (objective, float(np.abs(gradient).max(initial=0.0)))
        return -objective, -gradient

    trace: list[tuple[int, float, float]] = []
    obj0, grad0 = problem.objective_and_gradient(np.zeros(problem.K))
    trace.append((0, obj0, float(np.abs(grad0).max(initial=0.0))))
    if obj0 > best["objective"]:
        best["objective"] = obj0
        best["lam"] = np.zeros(problem.K)

    def callback(lam: np.ndarray) -> None:
        entry = memo.get(lam.tobytes())
        if entry is None:
            objective, gradient = problem.objective_and_gradient(lam)
            entry = (objective, float(np.abs(gradient).max(initial=0.0)))
        trace.append((len(trace), entry[0], entry[1]))

    result = minimize(
        negated,
        np.zeros(problem.K),
        jac=True,
        method="L-BFGS-B",
        callback=callback,
        options={
            "maxiter": tc.max_iters,
            "maxcor": tc.lbfgs_history,
            "gtol": tc.epsilon,
            "ftol": 0.0,
        },
    )

    final_obj, final_grad = problem.objective_and_gradient(best["lam"])
    report = TrainReport(
        iterations=int(result.nit),
        final_objective=final_obj,
        final_grad_norm=float(np.abs(final_grad).max(initial=0.0)),
        trace=trace,
    )
    model = CrfModel(lam=best["lam"], index=problem.index, config=config)
    return model, report
