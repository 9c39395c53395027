"""Reproduction harness: the synthetic error-mass illustration, the
confusion-error Monte Carlo table, greedy/grid sweeps, and the Covertype
protocol.

Every experiment fans a master seed out as rng([master, condition, trial]),
so reports are bit-identical across runs regardless of thread count.
"""

from __future__ import annotations

import csv
import json
import time
from importlib.metadata import version as _pkg_version
from pathlib import Path

import numpy as np

from .core import CoverPair, WeightVector
from .data_io import COVERTYPE_CONTINUOUS, load_covertype, standardize
from .knn import KnnModel, regress_batch, suggest_k
from .metrics import (
    empirical_confusion,
    macro_f1_from_scores,
    matrix_deviation,
    precision_recall_f1,
)
from .optimize import GreedyConfig, SimplexGrid, enumerate_simplex_grid, greedy_search, grid_search
from .population import (
    EvaluationGrid,
    SyntheticDistribution,
    marginal_probs,
    population_confusion,
    sample,
    section5_distribution,
    threshold_curves,
    tnfn_error_masses,
)

CSV_SCHEMA_VERSION = 1


def _tool_version() -> str:
    try:
        return _pkg_version("wknn")
    except Exception:
        return "unknown"


def _report(name: str, config: dict, results: dict, raw=None, started: float = 0.0) -> dict:
    return {
        "experiment": name,
        "config": config,
        "results": results,
        "raw": raw,
        "tool_version": _tool_version(),
        "elapsed_seconds": time.perf_counter() - started,
        "csv_schema_version": CSV_SCHEMA_VERSION,
    }


def _write_json(report: dict, out_dir, name: str) -> None:
    if out_dir is None:
        return
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{name}.json", "w") as fh:
        json.dump(report, fh, indent=2)


DEFAULT_SECTION5_PAIR = CoverPair(
    WeightVector(np.array([0.52, 0.29, 0.19])),
    WeightVector(np.array([0.48, 0.31, 0.21])),
    target_class=1,
)


def run_bound_illustration(
    epsilon: float = 0.1,
    pair: CoverPair = DEFAULT_SECTION5_PAIR,
    target_class: int = 1,
    marginal_grid_size: int = 10000,
    mass_grid_size: int = 1000,
    dist: SyntheticDistribution | None = None,
    out_dir=None,
) -> dict:
    """Error-mass and decision-band illustration on the synthetic distribution.

    Emits the marginal class probabilities, the (tne, fne) masses, and a CSV
    with eta_c and the lower/upper band curves per grid point.
    """
    started = time.perf_counter()
    dist = dist or section5_distribution()
    marg = marginal_probs(dist, EvaluationGrid.midpoint(marginal_grid_size))
    grid = EvaluationGrid.midpoint(mass_grid_size)
    tne, fne = tnfn_error_masses(dist, pair, target_class, epsilon, grid)
    lower, upper = threshold_curves(dist, pair, target_class, epsilon, grid)
    eta_c = dist.eta(grid)[:, target_class - 1]
    in_band = (lower <= eta_c) & (eta_c <= upper)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "section5_curves.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "eta_c", "band_lower", "band_upper", "in_band"])
            for row in zip(grid.points, eta_c, lower, upper, in_band):
                writer.writerow([repr(row[0]), repr(row[1]), repr(row[2]),
                                 repr(row[3]), int(row[4])])

    config = {
        "epsilon": epsilon,
        "pair_lower": pair.lower.q.tolist(),
        "pair_upper": pair.upper.q.tolist(),
        "target_class": target_class,
        "marginal_grid_size": marginal_grid_size,
        "mass_grid_size": mass_grid_size,
    }
    results = {
        "marginal_probs": marg.p.tolist(),
        "tne": tne,
        "fne": fne,
        "band_fraction": float(in_band.mean()),
    }
    report = _report("section5", config, results, started=started)
    _write_json(report, out_dir, "section5")
    return report


TABLE1_CONDITIONS = ((50, 18), (100, 23), (1000, 49))
TABLE1_WEIGHTS = (0.5, 0.3, 0.2)


def run_table1(
    trials: int = 1000,
    conditions=TABLE1_CONDITIONS,
    weights=TABLE1_WEIGHTS,
    master_seed: int = 20240501,
    population_grid_size: int = 10000,
    evaluation: str = "in-sample",
    dist: SyntheticDistribution | None = None,
    out_dir=None,
) -> dict:
    """Monte Carlo average confusion-matrix deviations per (n, k) condition.

    evaluation='in-sample' scores the rule on the training sample itself
    (matching the empirical confusion definitions); 'fresh' draws an
    independent evaluation sample of the same size.
    """
    if evaluation not in ("in-sample", "fresh"):
        raise ValueError(f"unknown evaluation mode {evaluation!r}")
    started = time.perf_counter()
    dist = dist or section5_distribution()
    q = WeightVector(np.asarray(weights, dtype=np.float64))
    pop_cm = population_confusion(dist, q, EvaluationGrid.midpoint(population_grid_size))

    raw = []
    aggregates = []
    for cond_idx, (n, k) in enumerate(conditions):
        deviations = np.empty((trials, 4))
        for t in range(trials):
            train = sample(dist, n, [master_seed, cond_idx, t])
            model = KnnModel(train, k)
            if evaluation == "in-sample":
                eval_set = train
            else:
                eval_set = sample(dist, n, [master_seed, cond_idx, t, 1])
            cm = empirical_confusion(model, q, eval_set)
            deviations[t] = matrix_deviation(cm, pop_cm)[0]  # class 1 row
        mean = deviations.mean(axis=0)
        sem = deviations.std(axis=0, ddof=1) / np.sqrt(trials) if trials > 1 else np.zeros(4)
        aggregates.append({
            "n": n, "k": k,
            "mean_abs_tn": mean[0], "mean_abs_fn": mean[1],
            "mean_abs_fp": mean[2], "mean_abs_tp": mean[3],
            "sem_tn": sem[0], "sem_fn": sem[1], "sem_fp": sem[2], "sem_tp": sem[3],
        })
        raw.append({"n": n, "k": k, "per_trial": deviations.tolist()})

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "table1.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "k", "abs_tn", "abs_tp", "abs_fn", "abs_fp"])
            for agg in aggregates:
                writer.writerow([agg["n"], agg["k"], agg["mean_abs_tn"],
                                 agg["mean_abs_tp"], agg["mean_abs_fn"], agg["mean_abs_fp"]])

    config = {
        "trials": trials,
        "conditions": list(map(list, conditions)),
        "weights": list(weights),
        "master_seed": master_seed,
        "population_grid_size": population_grid_size,
        "evaluation": evaluation,
    }
    report = _report("table1", config, {"conditions": aggregates},
                     raw=(raw if trials <= 50 else None), started=started)
    _write_json(report, out_dir, "table1")
    return report


GREEDY_SWEEP_INITIAL = (0.3, 0.3, 0.4)


def _population_macro_f1(dist, q: WeightVector, grid: EvaluationGrid) -> float:
    return precision_recall_f1(population_confusion(dist, q, grid)).macro_f1


def run_greedy_sweep(
    mode: str = "steps",
    n: int = 1000,
    num_steps: int = 20,
    step_sizes=(0.01, 0.05),
    n_values=(100, 1000, 10000),
    trials: int = 50,
    step_size: float = 0.01,
    grid_spacing: float = 0.01,
    master_seed: int = 20240502,
    population_grid_size: int = 10000,
    dist: SyntheticDistribution | None = None,
    out_dir=None,
) -> dict:
    """Greedy weight-search sweeps on the synthetic distribution.

    mode='steps' traces empirical and population macro-F1 per greedy step for
    each step size on a single sample of size n. mode='samples' averages
    empirical/population macro-F1 of greedy, grid, and unweighted rules over
    trials for each sample size.
    """
    started = time.perf_counter()
    dist = dist or section5_distribution()
    pop_grid = EvaluationGrid.midpoint(population_grid_size)
    initial = WeightVector(np.asarray(GREEDY_SWEEP_INITIAL))

    if mode == "steps":
        results = {"traces": []}
        rows = []
        for gamma_idx, gamma in enumerate(step_sizes):
            train = sample(dist, n, [master_seed, 0, gamma_idx])
            model = KnnModel(train, suggest_k(n))
            eta = regress_batch(model, train.features)

            def objective(q: WeightVector) -> float:
                return macro_f1_from_scores(eta, train.labels, dist.num_classes, q.q)

            final, trace = greedy_search(
                objective, GreedyConfig(gamma, num_steps, initial)
            )
            per_step = trace.step_metrics()
            # reconstruct the weight at the end of each step for population F1
            weights_per_step = []
            by_step: dict[int, WeightVector] = {}
            for rec in trace.records:
                by_step[rec.step] = rec.current
            current = initial
            for step in range(1, num_steps + 1):
                current = by_step.get(step, current)
                weights_per_step.append(current)
            entry = {
                "step_size": gamma,
                "empirical_f1": [trace.initial_metric] + per_step,
                "population_f1": [_population_macro_f1(dist, initial, pop_grid)]
                + [_population_macro_f1(dist, w, pop_grid) for w in weights_per_step],
                "final_weights": final.q.tolist(),
            }
            results["traces"].append(entry)
            for step, (emp, pop) in enumerate(zip(entry["empirical_f1"],
                                                  entry["population_f1"])):
                rows.append([gamma, step, emp, pop])
        csv_header = ["step_size", "step", "empirical_f1", "population_f1"]
        csv_name = "figure3_steps.csv"
        config = {"mode": mode, "n": n, "num_steps": num_steps,
                  "step_sizes": list(step_sizes), "master_seed": master_seed,
                  "population_grid_size": population_grid_size}
    elif mode == "samples":
        grid_candidates = list(enumerate_simplex_grid(
            SimplexGrid(grid_spacing, dist.num_classes)
        ))
        uniform = WeightVector(np.ones(dist.num_classes))
        results = {"by_sample_size": []}
        rows = []
        for n_idx, n_value in enumerate(n_values):
            k = suggest_k(n_value)
            sums = {name: np.zeros(2) for name in ("greedy", "grid", "unweighted")}
            for t in range(trials):
                train = sample(dist, n_value, [master_seed, 1, n_idx, t])
                model = KnnModel(train, k)
                eta = regress_batch(model, train.features)

                def objective(q: WeightVector) -> float:
                    return macro_f1_from_scores(eta, train.labels, dist.num_classes, q.q)

                greedy_q, _ = greedy_search(
                    objective, GreedyConfig(step_size, num_steps, initial)
                )
                grid_q, _ = grid_search(objective, grid_candidates)
                for name, q in (("greedy", greedy_q), ("grid", grid_q),
                                ("unweighted", uniform)):
                    sums[name] += (objective(q), _population_macro_f1(dist, q, pop_grid))
            for name in ("greedy", "grid", "unweighted"):
                emp, pop = sums[name] / trials
                results["by_sample_size"].append({
                    "n": n_value, "algorithm": name,
                    "empirical_f1": emp, "population_f1": pop,
                    "gap": abs(emp - pop),
                })
                rows.append([n_value, name, emp, pop, abs(emp - pop)])
        csv_header = ["n", "algorithm", "empirical_f1", "population_f1", "gap"]
        csv_name = "figure3_samples.csv"
        config = {"mode": mode, "n_values": list(n_values), "trials": trials,
                  "num_steps": num_steps, "step_size": step_size,
                  "grid_spacing": grid_spacing, "master_seed": master_seed,
                  "population_grid_size": population_grid_size}
    else:
        raise ValueError(f"unknown sweep mode {mode!r}")

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / csv_name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(csv_header)
            writer.writerows(rows)

    report = _report("figure3", config, results, started=started)
    _write_json(report, out_dir, f"figure3_{mode}")
    return report


def run_covertype(
    path,
    k: int = 160,
    num_steps: int = 25,
    step_size: float = 0.02,
    grid_spacing: float = 0.083,
    grid_min_weight: float = 0.0,
    standardize_features: bool = True,
    out_dir=None,
) -> dict:
    """Covertype protocol: fit kNN on train, tune weights on dev macro-F1,
    report train and test macro-F1 for greedy, grid, and unweighted rules."""
    started = time.perf_counter()
    train, dev, test = load_covertype(path)
    if standardize_features:
        (train, dev, test), _ = standardize(
            train, (dev, test), columns=np.arange(COVERTYPE_CONTINUOUS)
        )
    model = KnnModel(train, k)
    num_classes = train.num_classes
    eta_dev = regress_batch(model, dev.features)

    def objective(q: WeightVector) -> float:
        return macro_f1_from_scores(eta_dev, dev.labels, num_classes, q.q)

    balanced = WeightVector(np.full(num_classes, 1.0 / num_classes))
    greedy_q, trace = greedy_search(
        objective, GreedyConfig(step_size, num_steps, balanced)
    )
    grid_q, _ = grid_search(
        objective,
        enumerate_simplex_grid(SimplexGrid(grid_spacing, num_classes, grid_min_weight)),
    )

    eta_train = regress_batch(model, train.features)
    eta_test = regress_batch(model, test.features)
    results = {"algorithms": []}
    for name, q in (("greedy", greedy_q), ("grid", grid_q), ("unweighted", balanced)):
        results["algorithms"].append({
            "algorithm": name,
            "train_f1": macro_f1_from_scores(eta_train, train.labels, num_classes, q.q),
            "test_f1": macro_f1_from_scores(eta_test, test.labels, num_classes, q.q),
            "weights": q.q.tolist(),
        })

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        trace.write_csv(out_dir / "covertype_greedy_trace.csv")
        with open(out_dir / "covertype.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["algorithm", "train_f1", "test_f1"]
                            + [f"q{i + 1}" for i in range(num_classes)])
            for row in results["algorithms"]:
                writer.writerow([row["algorithm"], row["train_f1"], row["test_f1"]]
                                + row["weights"])

    config = {
        "path": str(path), "k": k, "num_steps": num_steps, "step_size": step_size,
        "grid_spacing": grid_spacing, "grid_min_weight": grid_min_weight,
        "standardize_features": standardize_features,
        "split_sizes": [train.n, dev.n, test.n],
    }
    report = _report("covertype", config, results, started=started)
    _write_json(report, out_dir, "covertype")
    return report
