"""Core value types: datasets, class weights, simplex vectors, cover pairs.

Labels are 1-based externally ({1..C}); anything 0-based is an internal
detail of consumers. All types are immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError

PROB_SUM_TOL = 1e-9


def _frozen_array(obj, name: str, value, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(value, dtype=dtype)
    arr.setflags(write=False)
    object.__setattr__(obj, name, arr)
    return arr


@dataclass(frozen=True)
class Dataset:
    """A labeled sample: n feature rows with class labels in {1..C}."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        features = _frozen_array(self, "features", self.features, np.float64)
        labels = _frozen_array(self, "labels", self.labels, np.int64)
        if features.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {features.shape}")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ValueError("labels must be a vector with one entry per feature row")
        if features.shape[0] < 1:
            raise DegenerateInputError("dataset must contain at least one point")
        if self.num_classes < 2:
            raise ValueError("num_classes must be at least 2")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain NaN or Inf")
        if labels.min() < 1 or labels.max() > self.num_classes:
            raise ValueError(f"labels must lie in 1..{self.num_classes}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative class costs q; only the all-zero vector is rejected."""

    q: np.ndarray

    def __post_init__(self):
        q = _frozen_array(self, "q", self.q, np.float64)
        if q.ndim != 1:
            raise ValueError("weights must be a vector")
        if not np.all(np.isfinite(q)):
            raise ValueError("weights contain NaN or Inf")
        if np.any(q < 0):
            raise ValueError("weights must be nonnegative")
        if not np.any(q > 0):
            raise DegenerateInputError("at least one weight must be positive")

    @property
    def num_classes(self) -> int:
        return self.q.shape[0]

    @property
    def q_max(self) -> float:
        return float(self.q.max())


@dataclass(frozen=True)
class ProbabilityVector:
    """Point on the probability simplex; sum checked to PROB_SUM_TOL."""

    p: np.ndarray

    def __post_init__(self):
        # Entries a rounding error outside [0, 1] are clipped, not rejected;
        # the sum check below still uses the tight tolerance.
        raw = np.asarray(self.p, dtype=np.float64)
        if raw.ndim != 1:
            raise ValueError("probabilities must be a vector")
        if np.any(raw < -1e-12) or np.any(raw > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        p = _frozen_array(self, "p", np.clip(raw, 0.0, 1.0), np.float64)
        if abs(float(p.sum()) - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")

    @property
    def num_classes(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True)
class CoverPair:
    """Bracketing weights (lower, upper) intended to class-cover some q.

    The cover property is relative to a target class and a specific q;
    use is_class_covered to check it.
    """

    lower: WeightVector
    upper: WeightVector
    target_class: int = field(default=1)

    def __post_init__(self):
        if self.lower.num_classes != self.upper.num_classes:
            raise DimensionMismatchError(
                "cover pair halves have different numbers of classes"
            )
        if not 1 <= self.target_class <= self.lower.num_classes:
            raise ValueError("target_class out of range")

    @property
    def num_classes(self) -> int:
        return self.lower.num_classes


def is_class_covered(q: WeightVector, pair: CoverPair, c: int) -> bool:
    """Check whether q is class c-covered by the pair (strict inequalities).

    For the lower weight q' the target coordinate must exceed q_c and every
    other coordinate must fall below; the upper weight q'' is the mirror image.
    """
    if q.num_classes != pair.num_classes:
        raise DimensionMismatchError(
            f"weight has {q.num_classes} classes, pair has {pair.num_classes}"
        )
    if not 1 <= c <= q.num_classes:
        raise ValueError(f"class index {c} out of range 1..{q.num_classes}")
    i = c - 1
    qv, lo, hi = q.q, pair.lower.q, pair.upper.q
    others = np.arange(q.num_classes) != i
    return bool(
        qv[i] < lo[i]
        and np.all(qv[others] > lo[others])
        and qv[i] > hi[i]
        and np.all(qv[others] < hi[others])
    )


def normalize_to_simplex(v) -> ProbabilityVector:
    """Scale a nonnegative vector to sum to 1."""
    arr = np.asarray(v, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("input must be nonnegative")
    total = float(arr.sum())
    if total <= 0:
        raise DegenerateInputError("cannot normalize an all-zero vector")
    return ProbabilityVector(arr / total)
