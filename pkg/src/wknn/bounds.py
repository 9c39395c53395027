"""Closed-form calculators for the finite-sample error bounds.

Natural logarithms throughout. Vacuous bounds (> 1) are returned uncapped
with a flag so monotonicity diagnostics survive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import WeightVector
from .errors import InfeasibleBudgetError
from .metrics import ConfusionMatrix, MetricReport, precision_recall_f1, TN, FN, FP, TP


@dataclass(frozen=True)
class SmoothnessParams:
    """Regularity constants: Holder exponent/constant, intrinsic dimension,
    and the density lower bound p_* valid for radii up to r_star."""

    alpha: float
    L: float
    d: int
    p_star: float
    r_star: float

    def __post_init__(self):
        if min(self.alpha, self.L, self.p_star, self.r_star) <= 0 or self.d < 1:
            raise ValueError("all smoothness parameters must be positive")


@dataclass(frozen=True)
class MarginParams:
    """Margin condition constants (documented parameters; nothing estimates them)."""

    beta: float
    M: float

    def __post_init__(self):
        if self.beta <= 0 or self.M <= 0:
            raise ValueError("margin parameters must be positive")


@dataclass(frozen=True)
class BoundBudget:
    """Sample/failure-probability budget shared by the bound formulas."""

    delta: float
    n: int
    k: int
    num_classes: int = 2
    cover_size: int = 1
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        if self.num_classes < 2 or self.cover_size < 1 or self.epsilon < 0:
            raise ValueError("invalid budget parameters")


def accuracy_boundary_terms(budget: BoundBudget, q: WeightVector) -> tuple[float, float]:
    """The ball-mass level p and score margin Delta of the accuracy bound.

    p = (k/n) / (1 - sqrt((4/k) log(2/delta)));
    Delta = min(1, sqrt((2 q_max^2 / k)(log C + 2 log(2/delta)))).
    Requires k > 4 log(2/delta) so the denominator is positive.
    """
    log_term = math.log(2.0 / budget.delta)
    root = math.sqrt(4.0 * log_term / budget.k)
    if root >= 1.0:
        raise InfeasibleBudgetError(
            f"k={budget.k} too small for delta={budget.delta}: need k > 4 log(2/delta)"
        )
    p = (budget.k / budget.n) / (1.0 - root)
    delta_term = math.sqrt(
        (2.0 * q.q_max**2 / budget.k) * (math.log(budget.num_classes) + 2.0 * log_term)
    )
    return p, min(1.0, delta_term)


def euclidean_shattering(n: int, d: int) -> float:
    """Shattering coefficient of balls over n points in the Euclidean unit cube."""
    return 2.0 * n ** (d + 1) + 2.0


@dataclass(frozen=True)
class UniformErrorBound:
    """Three-term uniform-error bound plus the extra failure probability."""

    value: float
    bias_term: float
    variance_term: float
    deviation_term: float
    side_probability: float
    within_validity: bool

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bias_term": self.bias_term,
            "variance_term": self.variance_term,
            "deviation_term": self.deviation_term,
            "side_probability": self.side_probability,
            "within_validity": self.within_validity,
        }


def uniform_error_bound(params: SmoothnessParams, budget: BoundBudget,
                        shattering="euclidean-default") -> UniformErrorBound:
    """Sup-norm regression error bound:

    2^alpha L (2k/(p_* n))^(alpha/d) + 1/sqrt(k) + sqrt(log(S(n)/delta)/(2k)),

    holding with probability 1 - side_probability - delta, where
    side_probability = N((2k/(p_* n))^(1/d)) e^(-k/4) with the Euclidean
    covering number N(r) = (2/r)^d. Outside the validity region
    k/n <= p_* r_star^d / 2 the value is still computed but flagged.
    """
    if shattering == "euclidean-default":
        s_n = euclidean_shattering(budget.n, params.d)
    else:
        s_n = float(shattering)
        if s_n <= 0:
            raise ValueError("shattering coefficient must be positive")
    ratio = 2.0 * budget.k / (params.p_star * budget.n)
    bias = 2.0**params.alpha * params.L * ratio ** (params.alpha / params.d)
    variance = 1.0 / math.sqrt(budget.k)
    deviation = math.sqrt(math.log(s_n / budget.delta) / (2.0 * budget.k))
    radius = ratio ** (1.0 / params.d)
    side = (2.0 / radius) ** params.d * math.exp(-budget.k / 4.0)
    within = budget.k / budget.n <= params.p_star * params.r_star**params.d / 2.0
    return UniformErrorBound(
        value=bias + variance + deviation,
        bias_term=bias,
        variance_term=variance,
        deviation_term=deviation,
        side_probability=side,
        within_validity=within,
    )


@dataclass(frozen=True)
class ConfusionErrorBounds:
    """Per-class deviation bounds (E_TN, E_FN, E_FP, E_TP), uncapped."""

    per_class: np.ndarray
    vacuous: np.ndarray  # boolean, same shape

    def to_dict(self) -> dict:
        return {
            "per_class": [
                {"e_tn": row[TN], "e_fn": row[FN], "e_fp": row[FP], "e_tp": row[TP]}
                for row in self.per_class.tolist()
            ],
            "vacuous": self.vacuous.tolist(),
        }


def confusion_deviation_root(budget: BoundBudget) -> float:
    """The shared root term 3 sqrt((log(24N/delta) + 2 log C) / (2n))."""
    return 3.0 * math.sqrt(
        (math.log(24.0 * budget.cover_size / budget.delta)
         + 2.0 * math.log(budget.num_classes)) / (2.0 * budget.n)
    )


def confusion_error_bounds(masses: np.ndarray, budget: BoundBudget) -> ConfusionErrorBounds:
    """Deviation bounds E = 3 * mass + root term, per class and entry.

    masses is a (C, 4) array of band error masses in (tne, fne, fpe, tpe)
    order, matching the (tn, fn, fp, tp) confusion layout.
    """
    masses = np.asarray(masses, dtype=np.float64)
    if masses.ndim != 2 or masses.shape[1] != 4:
        raise ValueError("masses must have shape (C, 4)")
    if np.any(masses < 0) or np.any(masses > 1):
        raise ValueError("masses must lie in [0, 1]")
    bounds = 3.0 * masses + confusion_deviation_root(budget)
    return ConfusionErrorBounds(bounds, bounds > 1.0)


@dataclass(frozen=True)
class MetricErrorBounds:
    """Per-class metric deviation bounds; NaN where the condition fails."""

    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    applicable: np.ndarray  # boolean per class (F1 bound defined)
    macro_f1: float  # mean over applicable classes, NaN if none

    def to_dict(self) -> dict:
        return {
            "e_precision": self.precision.tolist(),
            "e_recall": self.recall.tolist(),
            "e_f1": self.f1.tolist(),
            "applicable": self.applicable.tolist(),
            "e_macro_f1": self.macro_f1,
        }


def metric_error_bounds(cm: ConfusionMatrix, cm_bounds: ConfusionErrorBounds,
                        report: MetricReport | None = None) -> MetricErrorBounds:
    """Propagate confusion-entry bounds to precision/recall/F1.

    E_prec = 3 (E_TP + E_FP) / (TP + FP - E_TP - E_FP), E_rec analogous with
    FN, E_F1 = 9 (E_prec + E_rec) / (prec + rec - E_prec - E_rec). Classes
    with a nonpositive denominator get NaN and are excluded from the macro
    mean.
    """
    if report is None:
        report = precision_recall_f1(cm)
    e = cm_bounds.per_class
    tp = cm.per_class[:, TP]
    fp = cm.per_class[:, FP]
    fn = cm.per_class[:, FN]

    def safe(num: np.ndarray, den: np.ndarray, scale: float) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(den > 0, scale * num / np.where(den > 0, den, 1.0), np.nan)

    e_prec = safe(e[:, TP] + e[:, FP], tp + fp - e[:, TP] - e[:, FP], 3.0)
    e_rec = safe(e[:, TP] + e[:, FN], tp + fn - e[:, TP] - e[:, FN], 3.0)
    e_f1 = safe(e_prec + e_rec, report.precision + report.recall - e_prec - e_rec, 9.0)
    applicable = np.isfinite(e_f1)
    macro = float(e_f1[applicable].mean()) if applicable.any() else float("nan")
    return MetricErrorBounds(e_prec, e_rec, e_f1, applicable, macro)
