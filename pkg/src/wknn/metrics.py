"""Confusion matrices under a weighted decision rule and derived metrics.

Entries are normalized: each per-class (tn, fn, fp, tp) quadruple sums to 1.
A point is a positive prediction for class c when q_c * eta_c >= the best
competing score, so exact ties count as positive for every tied class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import Dataset, WeightVector
from .errors import DegenerateInputError, DimensionMismatchError
from .knn import KnnModel, regress_batch

ROW_SUM_TOL = 1e-9

# column layout of ConfusionMatrix.per_class
TN, FN, FP, TP = 0, 1, 2, 3


@dataclass(frozen=True)
class ConfusionMatrix:
    """Per-class (tn, fn, fp, tp) quadruples; kind is 'empirical' or 'population'.

    Empirical matrices also carry the raw integer counts, whose per-class sums
    equal n exactly (the float quadruples can be off by rounding in the last
    bit, hence ROW_SUM_TOL).
    """

    per_class: np.ndarray
    kind: str
    counts: np.ndarray | None = None

    def __post_init__(self):
        arr = np.ascontiguousarray(self.per_class, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "per_class", arr)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError("per_class must have shape (C, 4)")
        if self.kind not in ("empirical", "population"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
            raise ValueError("confusion entries must lie in [0, 1]")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
            raise ValueError(f"per-class rows must sum to 1, got {sums}")
        if self.counts is not None:
            cnt = np.ascontiguousarray(self.counts, dtype=np.int64)
            cnt.setflags(write=False)
            object.__setattr__(self, "counts", cnt)
            if cnt.shape != arr.shape:
                raise ValueError("counts must match per_class in shape")

    @property
    def num_classes(self) -> int:
        return self.per_class.shape[0]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "per_class": [
                {"tn": row[TN], "fn": row[FN], "fp": row[FP], "tp": row[TP]}
                for row in self.per_class.tolist()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ConfusionMatrix":
        rows = [[r["tn"], r["fn"], r["fp"], r["tp"]] for r in data["per_class"]]
        return cls(np.asarray(rows), data["kind"])


@dataclass(frozen=True)
class MetricReport:
    """Per-class precision/recall/F1 and their unweighted macro-F1 mean."""

    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    macro_f1: float

    def to_dict(self) -> dict:
        return {
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
            "macro_f1": self.macro_f1,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def positive_mask(eta: np.ndarray, q: np.ndarray) -> np.ndarray:
    """(n, C) boolean: q_c * eta_c >= max over other classes of q_j * eta_j.

    Equivalent to the score being equal to the row maximum, which keeps the
    mask invariant under positive rescaling of q.
    """
    scores = eta * q
    return scores >= scores.max(axis=1, keepdims=True)


def confusion_counts(eta: np.ndarray, labels: np.ndarray, num_classes: int,
                     q: np.ndarray) -> np.ndarray:
    """Raw (C, 4) integer confusion counts (tn, fn, fp, tp) from regression scores."""
    pos = positive_mask(eta, q)
    out = np.empty((num_classes, 4), dtype=np.int64)
    for c in range(num_classes):
        is_c = labels == c + 1
        p = pos[:, c]
        out[c, TN] = np.count_nonzero(~is_c & ~p)
        out[c, FN] = np.count_nonzero(is_c & ~p)
        out[c, FP] = np.count_nonzero(~is_c & p)
        out[c, TP] = np.count_nonzero(is_c & p)
    return out


def empirical_confusion(source, q: WeightVector, data: Dataset) -> ConfusionMatrix:
    """Empirical confusion matrix of the q-weighted rule on a dataset.

    source is either a fitted KnnModel (regression estimates are computed on
    data.features) or a precomputed (n, C) array of estimates.
    """
    if data.n == 0:
        raise DegenerateInputError("dataset is empty")
    if isinstance(source, KnnModel):
        if source.num_classes != data.num_classes:
            raise DimensionMismatchError("model and dataset class counts differ")
        eta = regress_batch(source, data.features)
    else:
        eta = np.asarray(source, dtype=np.float64)
        if eta.shape != (data.n, data.num_classes):
            raise DimensionMismatchError(
                f"precomputed estimates must have shape ({data.n}, {data.num_classes})"
            )
    if q.num_classes != data.num_classes:
        raise DimensionMismatchError("weights and dataset class counts differ")
    counts = confusion_counts(eta, data.labels, data.num_classes, q.q)
    return ConfusionMatrix(counts / float(data.n), "empirical", counts=counts)


def precision_recall_f1(cm: ConfusionMatrix) -> MetricReport:
    """Per-class precision/recall/F1 with the zero-denominator-means-zero convention."""
    tp = cm.per_class[:, TP]
    fp = cm.per_class[:, FP]
    fn = cm.per_class[:, FN]
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        rec = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    return MetricReport(prec, rec, f1, float(f1.mean()))


def macro_f1_from_scores(eta: np.ndarray, labels: np.ndarray, num_classes: int,
                         q: np.ndarray) -> float:
    """Fast path: macro-F1 of the weighted rule straight from regression scores.

    Must agree exactly with precision_recall_f1(empirical_confusion(...)); the
    test suite asserts this.
    """
    pos = positive_mask(eta, q)
    onehot = labels[:, None] == np.arange(1, num_classes + 1)[None, :]
    tp = np.count_nonzero(pos & onehot, axis=0).astype(np.float64)
    fp = np.count_nonzero(pos & ~onehot, axis=0).astype(np.float64)
    fn = np.count_nonzero(~pos & onehot, axis=0).astype(np.float64)
    n = float(labels.shape[0])
    tp, fp, fn = tp / n, fp / n, fn / n
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        rec = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    return float(f1.mean())


def matrix_deviation(a: ConfusionMatrix, b: ConfusionMatrix) -> np.ndarray:
    """Entrywise absolute differences, shape (C, 4), columns (tn, fn, fp, tp)."""
    if a.num_classes != b.num_classes:
        raise DimensionMismatchError("confusion matrices have different class counts")
    return np.abs(a.per_class - b.per_class)
