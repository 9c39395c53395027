"""Exact k-nearest-neighbor search, regression estimates, and the weighted
plug-in classifier.

The decision rule picks argmax_c q_c * eta_hat_c(x). All tie-breaking is
deterministic: equal distances go to the smaller training index, equal
scores to the smaller class index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import label_counts
from .core import Dataset, ProbabilityVector, WeightVector
from .errors import DimensionMismatchError

SUPPORTED_METRICS = ("euclidean",)


@dataclass(frozen=True)
class KnnModel:
    """An immutable kNN model: the training sample plus a neighbor count."""

    training: Dataset
    k: int
    metric: str = "euclidean"

    def __post_init__(self):
        if not 1 <= self.k <= self.training.n:
            raise ValueError(f"k must satisfy 1 <= k <= {self.training.n}, got {self.k}")
        if self.metric not in SUPPORTED_METRICS:
            raise ValueError(f"unsupported metric {self.metric!r}")

    @property
    def num_classes(self) -> int:
        return self.training.num_classes


@dataclass(frozen=True)
class NeighborSet:
    """k training indices ordered by nondecreasing distance to a query."""

    indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "distances", np.asarray(self.distances, dtype=np.float64))
        if np.any(np.diff(self.distances) < 0):
            raise ValueError("distances must be nondecreasing")
        if len(set(self.indices.tolist())) != self.indices.shape[0]:
            raise ValueError("neighbor indices must be distinct")


def _check_query(model: KnnModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != model.training.dim:
        raise DimensionMismatchError(
            f"query has dimension {x.shape[0]}, training data has {model.training.dim}"
        )
    return x


def nearest_neighbors(model: KnnModel, x) -> NeighborSet:
    """Exact k nearest training points, distance ties broken by smaller index."""
    x = _check_query(model, x)
    diff = model.training.features - x
    d2 = np.einsum("ij,ij->i", diff, diff)
    order = np.argsort(d2, kind="stable")[: model.k]
    return NeighborSet(order, np.sqrt(d2[order]))


def regress_batch(model: KnnModel, queries) -> np.ndarray:
    """Row-stacked kNN regression estimates, shape (m, C); rows sum to 1."""
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != model.training.dim:
        raise DimensionMismatchError(
            f"queries must have shape (m, {model.training.dim})"
        )
    counts = label_counts(
        np.ascontiguousarray(model.training.features),
        model.training.labels,
        model.num_classes,
        queries,
        model.k,
    )
    return counts / float(model.k)


def knn_regress(model: KnnModel, x) -> ProbabilityVector:
    """Estimated class probabilities at x: neighbor label frequencies."""
    x = _check_query(model, x)
    return ProbabilityVector(regress_batch(model, x[None, :])[0])


def _decide(eta: np.ndarray, q: np.ndarray) -> np.ndarray:
    # argmax of q_c * eta_c per row; np.argmax keeps the first (smallest class) on ties
    return np.argmax(eta * q, axis=1) + 1


def classify_weighted(model: KnnModel, q: WeightVector, x) -> int:
    """Weighted plug-in decision at x, 1-based class index."""
    if q.num_classes != model.num_classes:
        raise DimensionMismatchError(
            f"weights have {q.num_classes} classes, model has {model.num_classes}"
        )
    eta = regress_batch(model, _check_query(model, x)[None, :])
    return int(_decide(eta, q.q)[0])


def classify_batch(model: KnnModel, q: WeightVector, queries) -> np.ndarray:
    """Vectorized classify_weighted; order matches the query order."""
    if q.num_classes != model.num_classes:
        raise DimensionMismatchError(
            f"weights have {q.num_classes} classes, model has {model.num_classes}"
        )
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    if queries.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return _decide(regress_batch(model, queries), q.q)


def suggest_k(n: int, alpha: float = 1.0, d: int = 1, mode: str = "cube-root") -> int:
    """Heuristic neighbor counts.

    cube-root: min(n, round(5 * n^(1/3))), the synthetic-experiment default.
    rate-optimal: round(n^(2a/(2a+d)) * (log n)^(d/(2a+d))) clamped to [1, n];
    order-of-magnitude guidance only since the theory's constant is unknown.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if mode == "cube-root":
        return min(n, round(5 * n ** (1 / 3)))
    if mode == "rate-optimal":
        if alpha <= 0 or d < 1:
            raise ValueError("alpha must be positive and d >= 1")
        expo = 2 * alpha / (2 * alpha + d)
        log_expo = d / (2 * alpha + d)
        value = n**expo * max(math.log(n), 0.0) ** log_expo if n > 1 else 1.0
        return int(min(max(round(value), 1), n))
    raise ValueError(f"unknown mode {mode!r}")
