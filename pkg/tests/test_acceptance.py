"""Acceptance gate: one test per headline requirement, each printing a
single PASS/FAIL line (visible with pytest -v). Tolerances are pinned here
and nowhere else."""

import functools
import os
import time
from pathlib import Path

import mpmath
import numpy as np
import pytest

from wknn.bounds import (
    BoundBudget,
    SmoothnessParams,
    accuracy_boundary_terms,
    confusion_deviation_root,
    confusion_error_bounds,
    metric_error_bounds,
    uniform_error_bound,
)
from wknn.core import CoverPair, Dataset, WeightVector
from wknn.knn import KnnModel, classify_weighted, nearest_neighbors
from wknn.metrics import ConfusionMatrix, empirical_confusion
from wknn.optimize import (
    GreedyConfig,
    SimplexGrid,
    enumerate_simplex_grid,
    greedy_search,
    grid_search,
)
from wknn.population import (
    EvaluationGrid,
    marginal_probs,
    section5_distribution,
    tnfn_error_masses,
)
from wknn.experiments import run_greedy_sweep, run_table1

mpmath.mp.dps = 60

COVERTYPE_CANDIDATES = (
    os.environ.get("WKNN_COVERTYPE_PATH", ""),
    "data/covtype.data",
    "covtype.data",
)


def announced(test):
    """Print an explicit PASS/FAIL line for the acceptance report."""

    @functools.wraps(test)
    def wrapper(*args, **kwargs):
        try:
            test(*args, **kwargs)
        except Exception:
            print(f"[ACCEPTANCE] {test.__name__}: FAIL")
            raise
        print(f"[ACCEPTANCE] {test.__name__}: PASS")

    return wrapper


@announced
def test_synthetic_marginal_probabilities():
    # (0.22, 0.35, 0.43) within +/- 0.01 on the 10000-point midpoint grid,
    # in under one second
    started = time.perf_counter()
    marg = marginal_probs(section5_distribution(), EvaluationGrid.midpoint(10000))
    elapsed = time.perf_counter() - started
    np.testing.assert_allclose(marg.p, [0.22, 0.35, 0.43], atol=0.01)
    assert elapsed < 1.0, f"marginals took {elapsed:.2f}s"


@announced
def test_decision_band_error_masses():
    # covering pair (0.52, 0.29, 0.19) / (0.48, 0.31, 0.21), slack 0.1,
    # 1000-point grid: tne = 0.20 +/- 0.01 and fne = 0.06 +/- 0.01,
    # in under one second
    pair = CoverPair(
        WeightVector(np.array([0.52, 0.29, 0.19])),
        WeightVector(np.array([0.48, 0.31, 0.21])),
        target_class=1,
    )
    started = time.perf_counter()
    tne, fne = tnfn_error_masses(
        section5_distribution(), pair, 1, 0.1, EvaluationGrid.midpoint(1000)
    )
    elapsed = time.perf_counter() - started
    assert tne == pytest.approx(0.20, abs=0.01), f"tne={tne}"
    assert fne == pytest.approx(0.06, abs=0.01), f"fne={fne}"
    assert elapsed < 1.0, f"error masses took {elapsed:.2f}s"


@announced
def test_monte_carlo_confusion_deviation_table():
    # 1000 trials per (n, k) condition with q = (0.5, 0.3, 0.2); class-1 mean
    # absolute deviations (tn, tp, fn, fp) against pinned reference targets
    report = run_table1(trials=1000)
    targets = {
        (1000, 49): ((0.03, 0.01, 0.01, 0.02), 0.02),
        (100, 23): ((0.11, 0.06, 0.04, 0.08), 0.03),
        (50, 18): ((0.16, 0.08, 0.05, 0.12), 0.03),
    }
    for agg in report["results"]["conditions"]:
        expected, tol = targets[(agg["n"], agg["k"])]
        observed = (agg["mean_abs_tn"], agg["mean_abs_tp"],
                    agg["mean_abs_fn"], agg["mean_abs_fp"])
        np.testing.assert_allclose(
            observed, expected, atol=tol,
            err_msg=f"condition n={agg['n']}, k={agg['k']}",
        )


@announced
def test_bound_formulas_match_high_precision_oracle():
    # every closed-form bound agrees with a 60-digit mpmath evaluator to
    # relative error 1e-12 on 100 random parameter draws, and the deviation
    # root's split-log display equals the collapsed log(24 N C^2 / delta)
    rng = np.random.default_rng(20240510)
    rel_tol = 1e-12

    def rel_err(actual, expected):
        if expected == 0:
            return abs(mpmath.mpf(actual))
        return abs((mpmath.mpf(actual) - expected) / expected)

    for _ in range(100):
        n = int(rng.integers(200, 100000))
        k = int(rng.integers(30, min(n, 5000) + 1))
        budget = BoundBudget(
            delta=float(rng.uniform(0.001, 0.5)), n=n, k=k,
            num_classes=int(rng.integers(2, 10)),
            cover_size=int(rng.integers(1, 50)),
        )
        log2d = mpmath.log(2 / mpmath.mpf(budget.delta))

        q = WeightVector(rng.uniform(0.05, 1.0, budget.num_classes))
        p, delta_term = accuracy_boundary_terms(budget, q)
        exp_p = (mpmath.mpf(k) / n) / (1 - mpmath.sqrt(4 * log2d / k))
        exp_delta = min(mpmath.mpf(1), mpmath.sqrt(
            (2 * mpmath.mpf(q.q_max) ** 2 / k)
            * (mpmath.log(budget.num_classes) + 2 * log2d)
        ))
        assert rel_err(p, exp_p) < rel_tol
        assert rel_err(delta_term, exp_delta) < rel_tol

        params = SmoothnessParams(
            alpha=float(rng.uniform(0.2, 2.0)), L=float(rng.uniform(0.1, 10.0)),
            d=int(rng.integers(1, 6)), p_star=float(rng.uniform(0.05, 2.0)),
            r_star=float(rng.uniform(0.1, 1.0)),
        )
        bound = uniform_error_bound(params, budget)
        ratio = 2 * mpmath.mpf(k) / (params.p_star * n)
        exp_value = (
            mpmath.mpf(2) ** params.alpha * params.L
            * ratio ** (mpmath.mpf(params.alpha) / params.d)
            + 1 / mpmath.sqrt(k)
            + mpmath.sqrt(mpmath.log(
                (2 * mpmath.mpf(n) ** (params.d + 1) + 2) / budget.delta
            ) / (2 * k))
        )
        assert rel_err(bound.value, exp_value) < rel_tol
        exp_side = ((2 / ratio ** (mpmath.mpf(1) / params.d)) ** params.d
                    * mpmath.exp(-mpmath.mpf(k) / 4))
        if exp_side > 1e-290:  # below this exp(-k/4) underflows float64
            assert rel_err(bound.side_probability, exp_side) < rel_tol
        else:
            assert bound.side_probability <= 1e-290

        root = confusion_deviation_root(budget)
        exp_root = 3 * mpmath.sqrt(
            (mpmath.log(24 * mpmath.mpf(budget.cover_size) / budget.delta)
             + 2 * mpmath.log(budget.num_classes)) / (2 * n)
        )
        collapsed = 3 * mpmath.sqrt(mpmath.log(
            24 * mpmath.mpf(budget.cover_size) * budget.num_classes**2 / budget.delta
        ) / (2 * n))
        assert rel_err(root, exp_root) < rel_tol
        assert rel_err(root, collapsed) < rel_tol

        masses = rng.uniform(0.0, 0.3, (budget.num_classes, 4))
        cm_bounds = confusion_error_bounds(masses, budget)
        for c in range(budget.num_classes):
            for j in range(4):
                assert rel_err(cm_bounds.per_class[c, j],
                               3 * mpmath.mpf(masses[c, j]) + exp_root) < rel_tol

        raw = rng.random((2, 4)) + 0.05
        cm = ConfusionMatrix(raw / raw.sum(axis=1, keepdims=True), "population")
        entry = confusion_error_bounds(rng.uniform(0.0, 0.01, (2, 4)), budget)
        mb = metric_error_bounds(cm, entry)
        for c in range(2):
            tn, fn, fp, tp = (mpmath.mpf(v) for v in cm.per_class[c])
            e_tn, e_fn, e_fp, e_tp = (mpmath.mpf(v) for v in entry.per_class[c])
            den_p = tp + fp - e_tp - e_fp
            den_r = tp + fn - e_tp - e_fn
            exp_prec = 3 * (e_tp + e_fp) / den_p if den_p > 0 else None
            exp_rec = 3 * (e_tp + e_fn) / den_r if den_r > 0 else None
            if exp_prec is None or exp_rec is None:
                continue
            assert rel_err(mb.precision[c], exp_prec) < rel_tol
            assert rel_err(mb.recall[c], exp_rec) < rel_tol
            prec = tp / (tp + fp)
            rec = tp / (tp + fn)
            den_f = prec + rec - exp_prec - exp_rec
            if den_f > 0 and mb.applicable[c]:
                exp_f1 = 9 * (exp_prec + exp_rec) / den_f
                assert rel_err(mb.f1[c], exp_f1) < rel_tol


@announced
def test_classifier_exact_properties():
    rng = np.random.default_rng(20240511)

    # (a) positive rescaling of the weights never changes a decision
    for _ in range(1000):
        n = int(rng.integers(3, 25))
        ds = Dataset(rng.random((n, 2)), rng.integers(1, 4, n), 3)
        model = KnnModel(ds, int(rng.integers(1, n + 1)))
        q = WeightVector(rng.random(3) + 1e-3)
        lam = float(rng.uniform(0.01, 10.0))
        x = rng.random(2)
        assert classify_weighted(model, q, x) == \
            classify_weighted(model, WeightVector(lam * q.q), x)

    # (b) uniform weights reduce to plurality vote among the neighbors
    uniform = WeightVector(np.ones(3))
    for _ in range(1000):
        n = int(rng.integers(3, 25))
        ds = Dataset(rng.random((n, 1)), rng.integers(1, 4, n), 3)
        model = KnnModel(ds, int(rng.integers(1, n + 1)))
        x = rng.random(1)
        votes = np.bincount(
            ds.labels[nearest_neighbors(model, x).indices], minlength=4
        )[1:]
        assert classify_weighted(model, uniform, x) == int(np.argmax(votes)) + 1

    # (c) neighbor search agrees with a full-sort brute-force oracle
    for _ in range(200):
        n = int(rng.integers(2, 51))
        d = int(rng.integers(1, 4))
        k = int(rng.integers(1, n + 1))
        feats = rng.random((n, d))
        ds = Dataset(feats, rng.integers(1, 4, n), 3)
        x = rng.random(d)
        dists = np.linalg.norm(feats - x, axis=1)
        oracle = sorted(range(n), key=lambda i: (dists[i], i))[:k]
        assert nearest_neighbors(KnnModel(ds, k), x).indices.tolist() == oracle

    # (d) empirical confusion rows sum to 1 exactly: the integer counts per
    # row sum to n without exception, and each reported rate is exactly
    # count / n
    for _ in range(50):
        n = int(rng.integers(2, 40))
        ds = Dataset(rng.random((n, 1)), rng.integers(1, 4, n), 3)
        model = KnnModel(ds, int(rng.integers(1, n + 1)))
        q = WeightVector(rng.random(3) + 1e-3)
        cm = empirical_confusion(model, q, ds)
        assert np.array_equal(cm.counts.sum(axis=1), np.full(3, n))
        assert np.array_equal(cm.per_class, cm.counts / n)


@announced
def test_optimizer_properties():
    rng = np.random.default_rng(20240512)

    # greedy acceptance sequence is nondecreasing on 100 random objectives
    for _ in range(100):
        c = int(rng.integers(2, 6))
        w = rng.standard_normal((4, c))
        objective = lambda q, w=w: float(np.max(w @ q.q))
        start = rng.random(c) + 0.1
        config = GreedyConfig(
            step_size=float(rng.uniform(0.01, 0.4)),
            num_steps=int(rng.integers(1, 10)),
            initial=WeightVector(start / start.sum()),
        )
        _, trace = greedy_search(objective, config)
        values = [trace.initial_metric] + trace.accepted_metrics()
        assert all(b >= a for a, b in zip(values, values[1:]))

    # grid search returns the exhaustive maximum on grids up to 10^4 points
    for _ in range(100):
        c = int(rng.integers(2, 5))
        w = rng.standard_normal(c)
        spacing = float(rng.choice([0.5, 0.25, 0.2, 0.1, 0.05]))
        points = list(enumerate_simplex_grid(SimplexGrid(spacing, c)))
        assert len(points) <= 10**4
        _, value = grid_search(lambda q: float(w @ q.q), points)
        assert value == max(float(w @ p.q) for p in points)

    # enumeration count matches a brute-force triple loop for three classes
    for spacing in (0.1, 0.05):
        m = round(1 / spacing)
        oracle = sum(
            1
            for a in range(m + 1)
            for b in range(m + 1 - a)
            for cc in (m - a - b,)
            if a + b + cc == m
        )
        count = sum(1 for _ in enumerate_simplex_grid(SimplexGrid(spacing, 3)))
        assert count == oracle


@announced
def test_generalization_gap_shrinks_with_sample_size():
    # 50 trials per sample size: the |empirical - population| macro-F1 gap
    # must be strictly smaller at n = 10000 than at n = 100 for the greedy,
    # grid, and unweighted rules
    report = run_greedy_sweep(mode="samples", n_values=(100, 10000), trials=50)
    gaps = {}
    for entry in report["results"]["by_sample_size"]:
        gaps[(entry["algorithm"], entry["n"])] = entry["gap"]
    for algorithm in ("greedy", "grid", "unweighted"):
        small, large = gaps[(algorithm, 100)], gaps[(algorithm, 10000)]
        assert large < small, f"{algorithm}: gap {large} at n=10000 vs {small} at n=100"


@announced
def test_covertype_soft_targets():
    path = next((p for p in COVERTYPE_CANDIDATES if p and Path(p).exists()), None)
    if path is None:
        pytest.skip("Covertype data file not present")
    from wknn.experiments import run_covertype

    report = run_covertype(path)
    by_name = {row["algorithm"]: row for row in report["results"]["algorithms"]}
    unweighted = by_name["unweighted"]["test_f1"]
    assert 0.04 <= unweighted <= 0.12, f"unweighted test macro-F1 {unweighted}"
    assert by_name["greedy"]["test_f1"] > unweighted
