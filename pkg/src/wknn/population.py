"""Population quantities for distributions on [0, 1] with known regression
functions: marginals, population confusion matrices, decision-band error
masses, and sampling.

Integrals use the midpoint rule on a uniform grid; the integrands contain
indicator jumps, so higher-order quadrature buys nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Dataset, ProbabilityVector, WeightVector, CoverPair
from .errors import DegenerateInputError, DimensionMismatchError
from .metrics import ConfusionMatrix

DENSITY_TOL = 1e-6


@dataclass(frozen=True)
class EvaluationGrid:
    """Strictly increasing abscissae in [0, 1] used for quadrature."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.shape[0] < 2:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if pts[0] < 0 or pts[-1] > 1:
            raise ValueError("grid points must lie in [0, 1]")

    @classmethod
    def midpoint(cls, n: int) -> "EvaluationGrid":
        """Midpoints of n equal cells of [0, 1]."""
        if n < 2:
            raise ValueError("grid size must be at least 2")
        return cls((np.arange(n) + 0.5) / n)

    @property
    def size(self) -> int:
        return self.points.shape[0]


def _uniform_density(x: np.ndarray) -> np.ndarray:
    return np.ones_like(x)


@dataclass(frozen=True)
class SyntheticDistribution:
    """Closed-form regression function plus covariate density on [0, 1].

    regression maps an array of abscissae to an (N, C) matrix whose rows are
    probability vectors; density defaults to uniform.
    """

    regression: Callable[[np.ndarray], np.ndarray]
    num_classes: int
    density: Callable[[np.ndarray], np.ndarray] = field(default=_uniform_density)

    def eta(self, grid: EvaluationGrid) -> np.ndarray:
        """Regression values on the grid, validated as probability rows."""
        values = np.asarray(self.regression(grid.points), dtype=np.float64)
        if values.shape != (grid.size, self.num_classes):
            raise DimensionMismatchError(
                f"regression must return shape ({grid.size}, {self.num_classes})"
            )
        if np.any(values < -1e-9) or np.any(values > 1 + 1e-9):
            raise DegenerateInputError("regression values leave [0, 1]")
        if np.any(np.abs(values.sum(axis=1) - 1.0) > 1e-9):
            raise DegenerateInputError("regression rows must sum to 1")
        return np.clip(values, 0.0, 1.0)

    def weights(self, grid: EvaluationGrid) -> np.ndarray:
        """Normalized density weights; the raw density must integrate to ~1."""
        w = np.asarray(self.density(grid.points), dtype=np.float64)
        if np.any(w < 0):
            raise DegenerateInputError("density must be nonnegative")
        mean = float(w.mean())
        if abs(mean - 1.0) > DENSITY_TOL:
            raise DegenerateInputError(
                f"density integrates to {mean:.8f} on the grid, expected 1"
            )
        return w / w.sum()


def section5_distribution() -> SyntheticDistribution:
    """The worked three-class example: eta_1 = exp(-2x) cos^2(4 pi x),
    eta_2 = (1-x)(1-eta_1), eta_3 = x(1-eta_1), X uniform on [0, 1]."""

    def regression(x: np.ndarray) -> np.ndarray:
        e1 = np.exp(-2.0 * x) * np.cos(4.0 * np.pi * x) ** 2
        return np.stack([e1, (1.0 - x) * (1.0 - e1), x * (1.0 - e1)], axis=-1)

    return SyntheticDistribution(regression, num_classes=3)


# ---------------------------------------------------------------------------
# JSON expression grammar for user-defined distributions
#
# A distribution spec is {"num_classes": C, "regression": [expr, ...]} with
# one expression per class. Expression nodes:
#   {"op": "x"}                            the abscissa
#   {"op": "const", "value": v}
#   {"op": "poly", "coeffs": [c0, c1, ...]}     c0 + c1*x + c2*x^2 + ...
#   {"op": "exp", "arg": expr}
#   {"op": "cos", "arg": expr}
#   {"op": "add", "args": [expr, ...]}
#   {"op": "mul", "args": [expr, ...]}
#   {"op": "pow", "base": expr, "exponent": p}
# ---------------------------------------------------------------------------


def _eval_expr(node: dict, x: np.ndarray) -> np.ndarray:
    op = node.get("op")
    if op == "x":
        return x
    if op == "const":
        return np.full_like(x, float(node["value"]))
    if op == "poly":
        return np.polynomial.polynomial.polyval(x, np.asarray(node["coeffs"], dtype=float))
    if op == "exp":
        return np.exp(_eval_expr(node["arg"], x))
    if op == "cos":
        return np.cos(_eval_expr(node["arg"], x))
    if op == "add":
        return np.sum([_eval_expr(a, x) for a in node["args"]], axis=0)
    if op == "mul":
        return np.prod([_eval_expr(a, x) for a in node["args"]], axis=0)
    if op == "pow":
        return _eval_expr(node["base"], x) ** float(node["exponent"])
    raise ValueError(f"unknown expression op {op!r}")


def distribution_from_spec(spec: dict) -> SyntheticDistribution:
    """Build a SyntheticDistribution from a JSON expression spec."""
    num_classes = int(spec["num_classes"])
    exprs = spec["regression"]
    if len(exprs) != num_classes:
        raise ValueError("need one regression expression per class")

    def regression(x: np.ndarray) -> np.ndarray:
        return np.stack([_eval_expr(e, x) for e in exprs], axis=-1)

    return SyntheticDistribution(regression, num_classes=num_classes)


def distribution_by_name(name: str) -> SyntheticDistribution:
    if name == "section5":
        return section5_distribution()
    raise ValueError(f"unknown distribution {name!r}")


# ---------------------------------------------------------------------------
# population quantities
# ---------------------------------------------------------------------------


def marginal_probs(dist: SyntheticDistribution, grid: EvaluationGrid) -> ProbabilityVector:
    """Density-weighted grid average of the regression function."""
    eta = dist.eta(grid)
    w = dist.weights(grid)
    p = w @ eta
    return ProbabilityVector(p / p.sum())


def population_confusion(dist: SyntheticDistribution, q: WeightVector,
                         grid: EvaluationGrid) -> ConfusionMatrix:
    """Quadrature of the four per-class confusion integrals under the q-rule."""
    if q.num_classes != dist.num_classes:
        raise DimensionMismatchError("weights and distribution class counts differ")
    eta = dist.eta(grid)
    w = dist.weights(grid)
    scores = eta * q.q
    best = scores.max(axis=1, keepdims=True)
    out = np.empty((dist.num_classes, 4), dtype=np.float64)
    for c in range(dist.num_classes):
        pos = scores[:, c] >= best[:, 0]
        ec = eta[:, c]
        out[c, 0] = np.sum(w * (1 - ec) * ~pos)  # tn
        out[c, 1] = np.sum(w * ec * ~pos)        # fn
        out[c, 2] = np.sum(w * (1 - ec) * pos)   # fp
        out[c, 3] = np.sum(w * ec * pos)         # tp
        out[c] /= out[c].sum()
    return ConfusionMatrix(out, "population")


def threshold_curves(dist: SyntheticDistribution, pair: CoverPair, c: int,
                     epsilon: float, grid: EvaluationGrid,
                     scaled_slack: bool = False):
    """Lower/upper decision-band curves for class c.

    Returns (lower, upper) arrays: t'(c, x) - slack' and t''(c, x) + slack''.
    By default the slack is plain epsilon; scaled_slack=True multiplies it by
    r(q, c) = 1 + q_max / q_c, the conservative factor used by the deviation
    bounds, which widens the band.
    """
    if not 1 <= c <= dist.num_classes:
        raise ValueError("class index out of range")
    if pair.num_classes != dist.num_classes:
        raise DimensionMismatchError("cover pair and distribution class counts differ")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    eta = dist.eta(grid)
    i = c - 1
    others = np.arange(dist.num_classes) != i

    def t(qv: np.ndarray) -> np.ndarray:
        return (eta[:, others] * qv[others]).max(axis=1) / qv[i]

    def r(qv: np.ndarray) -> float:
        return 1.0 + float(qv.max()) / qv[i]

    lo_q, hi_q = pair.lower.q, pair.upper.q
    slack_lo = epsilon * r(lo_q) if scaled_slack else epsilon
    slack_hi = epsilon * r(hi_q) if scaled_slack else epsilon
    return t(lo_q) - slack_lo, t(hi_q) + slack_hi


def tnfn_error_masses(dist: SyntheticDistribution, pair: CoverPair, c: int,
                      epsilon: float, grid: EvaluationGrid,
                      scaled_slack: bool = False) -> tuple[float, float]:
    """Error masses (tne, fne) of the decision band for class c.

    tne weights the band indicator by 1 - eta_c, fne by eta_c; both are
    density-weighted grid averages. See threshold_curves for the slack
    convention.
    """
    lower, upper = threshold_curves(dist, pair, c, epsilon, grid, scaled_slack)
    eta_c = dist.eta(grid)[:, c - 1]
    w = dist.weights(grid)
    band = (lower <= eta_c) & (eta_c <= upper)
    tne = float(np.sum(w * (1 - eta_c) * band))
    fne = float(np.sum(w * eta_c * band))
    return tne, fne


def sample(dist: SyntheticDistribution, n: int, seed: int) -> Dataset:
    """Draw n labeled points: X from the covariate density (uniform only),
    Y categorical from eta(X). Deterministic given the seed."""
    if n < 1:
        raise ValueError("n must be positive")
    if dist.density is not _uniform_density:
        raise NotImplementedError("sampling implemented for the uniform density only")
    rng = np.random.default_rng(seed)
    x = rng.random(n)
    eta = np.asarray(dist.regression(x), dtype=np.float64)
    u = rng.random(n)
    labels = (u[:, None] > np.cumsum(eta, axis=1)).sum(axis=1) + 1
    labels = np.minimum(labels, dist.num_classes)  # guard against rounding past 1
    return Dataset(x[:, None], labels, dist.num_classes)
