"""Weight-search over the simplex: greedy coordinate search and grid search."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from .core import WeightVector
from .errors import DegenerateInputError, OptimizationError

Objective = Callable[[WeightVector], float]


@dataclass(frozen=True)
class GreedyConfig:
    """Greedy coordinate search parameters.

    chained_updates keeps in-step acceptance (each candidate is compared to
    the best weight accepted so far within the step); False compares every
    candidate in a step against the weight the step started from.
    """

    step_size: float
    num_steps: int
    initial: WeightVector
    chained_updates: bool = True

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.num_steps < 0:
            raise ValueError("num_steps must be nonnegative")


@dataclass(frozen=True)
class TraceRecord:
    step: int
    coordinate: int  # 1-based
    sign: int
    candidate: WeightVector
    accepted: bool
    current: WeightVector
    metric: float  # objective at the current weight after this evaluation


@dataclass
class SearchTrace:
    """Per-candidate evaluation log; accepted metric values are nondecreasing."""

    initial_metric: float
    records: list[TraceRecord] = field(default_factory=list)

    def accepted_metrics(self) -> list[float]:
        return [r.metric for r in self.records if r.accepted]

    def step_metrics(self) -> list[float]:
        """Objective value at the end of each step (empty if no steps)."""
        out: dict[int, float] = {}
        for r in self.records:
            out[r.step] = r.metric
        return [out[s] for s in sorted(out)]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "coordinate", "sign", "accepted", "metric"])
            for r in self.records:
                writer.writerow([r.step, r.coordinate, r.sign, int(r.accepted), repr(r.metric)])


def _evaluate(objective: Objective, q: WeightVector) -> float:
    value = float(objective(q))
    if math.isnan(value):
        raise OptimizationError(f"objective returned NaN at {q.q.tolist()}")
    return value


def greedy_search(objective: Objective, config: GreedyConfig) -> tuple[WeightVector, SearchTrace]:
    """Coordinate-wise greedy ascent on the simplex.

    Each step perturbs one coordinate by +/- step_size, clips at zero,
    renormalizes to unit L1 norm, and accepts when the objective does not
    decrease (>= allows lateral moves). Candidates are tried in fixed order:
    coordinates ascending, +1 before -1. All-zero clipped candidates are
    skipped.
    """
    current = config.initial
    current_value = _evaluate(objective, current)
    trace = SearchTrace(initial_metric=current_value)
    num_classes = current.num_classes
    for step in range(1, config.num_steps + 1):
        step_base, step_base_value = current, current_value
        for i in range(num_classes):
            for sign in (1, -1):
                base = current if config.chained_updates else step_base
                stepped = np.maximum(base.q + sign * config.step_size * _basis(num_classes, i), 0.0)
                total = stepped.sum()
                if total <= 0:
                    continue
                candidate = WeightVector(stepped / total)
                value = _evaluate(objective, candidate)
                reference = current_value if config.chained_updates else step_base_value
                accepted = value >= reference
                if accepted:
                    current, current_value = candidate, value
                trace.records.append(TraceRecord(
                    step=step, coordinate=i + 1, sign=sign, candidate=candidate,
                    accepted=accepted, current=current, metric=current_value,
                ))
    return current, trace


def _basis(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


@dataclass(frozen=True)
class SimplexGrid:
    """Lattice over the simplex with coordinates m/M, M = round(1/spacing).

    The spacing is snapped to 1/M so that grid points sum to 1 exactly (a
    nominal spacing like 0.083 stands for 1/12).
    """

    spacing: float
    num_classes: int
    min_weight: float = 0.0

    def __post_init__(self):
        if self.spacing <= 0 or self.spacing > 1:
            raise ValueError("spacing must lie in (0, 1]")
        if self.min_weight < 0:
            raise ValueError("min_weight must be nonnegative")
        if self.min_weight * self.num_classes > 1:
            raise DegenerateInputError("min_weight * num_classes exceeds 1")
        if self.num_classes < 2:
            raise ValueError("need at least two classes")

    @property
    def resolution(self) -> int:
        return max(1, round(1.0 / self.spacing))


def enumerate_simplex_grid(grid: SimplexGrid) -> Iterator[WeightVector]:
    """Lazily yield all grid weights in lexicographic order.

    Coordinates are integer multiples of 1/M, at least min_weight, summing
    to exactly 1.
    """
    m = grid.resolution
    min_units = math.ceil(grid.min_weight * m - 1e-9)
    if min_units * grid.num_classes > m:
        raise DegenerateInputError("no grid point satisfies the minimum-weight constraint")

    def rec(prefix: list[int], remaining: int, slots: int) -> Iterator[list[int]]:
        if slots == 1:
            if remaining >= min_units:
                yield prefix + [remaining]
            return
        for units in range(min_units, remaining - min_units * (slots - 1) + 1):
            yield from rec(prefix + [units], remaining - units, slots - 1)

    for units in rec([], m, grid.num_classes):
        yield WeightVector(np.asarray(units, dtype=np.float64) / m)


def grid_search(objective: Objective,
                candidates: Iterable[WeightVector]) -> tuple[WeightVector, float]:
    """Exhaustive maximization; strict > update keeps the earliest maximizer."""
    best: WeightVector | None = None
    best_value = -math.inf
    for q in candidates:
        value = _evaluate(objective, q)
        if best is None or value > best_value:
            best, best_value = q, value
    if best is None:
        raise DegenerateInputError("grid search needs at least one candidate")
    return best, best_value
