"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import experiments
from .bounds import (
    BoundBudget,
    SmoothnessParams,
    accuracy_boundary_terms,
    confusion_error_bounds,
    metric_error_bounds,
    uniform_error_bound,
)
from .core import WeightVector
from .data_io import load_csv, write_csv
from .errors import DataFormatError, DegenerateInputError, InfeasibleBudgetError
from .knn import KnnModel, classify_batch
from .metrics import empirical_confusion, precision_recall_f1
from .optimize import GreedyConfig, SimplexGrid, enumerate_simplex_grid, greedy_search, grid_search
from .population import EvaluationGrid, distribution_by_name, distribution_from_spec, sample


def _fail_config(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _fail_data(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(3)


def _parse_weights(text: str, num_classes: int | None = None) -> WeightVector:
    try:
        values = [float(v) for v in text.split(",")]
        q = WeightVector(np.asarray(values))
    except (ValueError, DegenerateInputError) as exc:
        _fail_config(f"bad weights {text!r}: {exc}")
    if num_classes is not None and q.num_classes != num_classes:
        _fail_config(f"weights have {q.num_classes} entries, expected {num_classes}")
    return q


def _load_distribution(name: str, config: dict):
    if "distribution" in config:
        return distribution_from_spec(config["distribution"])
    try:
        return distribution_by_name(name)
    except ValueError as exc:
        _fail_config(str(exc))


def _read_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        _fail_config(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        _fail_config(f"config file is not valid JSON: {exc}")


def _load_dataset(path, has_header: bool):
    try:
        return load_csv(path, has_header=has_header)
    except FileNotFoundError:
        _fail_data(f"file not found: {path}")
    except (DataFormatError, DegenerateInputError) as exc:
        _fail_data(str(exc))


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; flags override its values.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory for JSON/CSV outputs.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Accepted for config echo; execution is deterministic regardless.")
@click.pass_context
def main(ctx, config_path, seed, out_dir, threads):
    """Class-weighted kNN classification, bounds, and weight search."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _read_config(config_path)
    ctx.obj["seed"] = seed
    ctx.obj["out"] = out_dir
    ctx.obj["threads"] = threads


@main.group()
def synth():
    """Synthetic-distribution utilities."""


@synth.command("sample")
@click.option("--dist", "dist_name", default="section5", show_default=True)
@click.option("--n", type=int, required=True)
@click.option("--out-file", type=click.Path(), required=True)
@click.pass_context
def synth_sample(ctx, dist_name, n, out_file):
    """Draw a labeled sample and write it as CSV (features then label)."""
    dist = _load_distribution(dist_name, ctx.obj["config"])
    if n < 1:
        _fail_config("--n must be positive")
    ds = sample(dist, n, ctx.obj["seed"])
    write_csv(ds, out_file)
    click.echo(f"wrote {ds.n} rows to {out_file}")


@main.command()
@click.option("--train", "train_path", type=click.Path(), required=True)
@click.option("--queries", "query_path", type=click.Path(), required=True)
@click.option("--k", type=int, required=True)
@click.option("--weights", default=None, help="Comma-separated class weights.")
@click.option("--has-header", is_flag=True)
@click.pass_context
def classify(ctx, train_path, query_path, k, weights, has_header):
    """Classify query rows with the weighted kNN rule; prints one label per line."""
    train, _ = _load_dataset(train_path, has_header)
    queries, _ = _load_dataset(query_path, has_header)
    if k < 1 or k > train.n:
        _fail_config(f"k must lie in 1..{train.n}")
    q = (_parse_weights(weights, train.num_classes) if weights
         else WeightVector(np.ones(train.num_classes)))
    model = KnnModel(train, k)
    for label in classify_batch(model, q, queries.features):
        click.echo(int(label))


@main.command()
@click.option("--train", "train_path", type=click.Path(), required=True)
@click.option("--eval", "eval_path", type=click.Path(), default=None,
              help="Evaluation CSV; defaults to the training file (in-sample).")
@click.option("--k", type=int, required=True)
@click.option("--weights", default=None)
@click.option("--has-header", is_flag=True)
@click.pass_context
def metrics(ctx, train_path, eval_path, k, weights, has_header):
    """Print the empirical confusion matrix and macro metrics as JSON."""
    train, _ = _load_dataset(train_path, has_header)
    eval_set = train if eval_path is None else _load_dataset(eval_path, has_header)[0]
    if k < 1 or k > train.n:
        _fail_config(f"k must lie in 1..{train.n}")
    q = (_parse_weights(weights, train.num_classes) if weights
         else WeightVector(np.ones(train.num_classes)))
    cm = empirical_confusion(KnnModel(train, k), q, eval_set)
    report = precision_recall_f1(cm)
    click.echo(json.dumps({"confusion": cm.to_dict(), "metrics": report.to_dict()}, indent=2))


@main.command()
@click.option("--delta", type=float, required=True)
@click.option("--n", type=int, required=True)
@click.option("--k", type=int, required=True)
@click.option("--classes", "num_classes", type=int, default=2, show_default=True)
@click.option("--cover-size", type=int, default=1, show_default=True)
@click.option("--epsilon", type=float, default=0.0, show_default=True)
@click.option("--weights", default=None, help="Needed for the accuracy boundary terms.")
@click.option("--alpha", type=float, default=None)
@click.option("--holder-constant", "L", type=float, default=None)
@click.option("--dim", type=int, default=None)
@click.option("--p-star", type=float, default=None)
@click.option("--r-star", type=float, default=None)
@click.option("--masses", default=None,
              help="JSON (C, 4) array of tne/fne/fpe/tpe masses per class.")
@click.pass_context
def bounds(ctx, delta, n, k, num_classes, cover_size, epsilon, weights,
           alpha, L, dim, p_star, r_star, masses):
    """Print every computable bound term as a JSON object with flags."""
    try:
        budget = BoundBudget(delta, n, k, num_classes, cover_size, epsilon)
    except ValueError as exc:
        _fail_config(str(exc))
    out: dict = {"budget": {"delta": delta, "n": n, "k": k, "classes": num_classes,
                            "cover_size": cover_size, "epsilon": epsilon}}
    if weights is not None:
        q = _parse_weights(weights, num_classes)
        try:
            p, delta_term = accuracy_boundary_terms(budget, q)
            out["accuracy_boundary"] = {"p": p, "delta": delta_term}
        except InfeasibleBudgetError as exc:
            out["accuracy_boundary"] = {"infeasible": str(exc)}
    if None not in (alpha, L, dim, p_star, r_star):
        try:
            params = SmoothnessParams(alpha, L, dim, p_star, r_star)
        except ValueError as exc:
            _fail_config(str(exc))
        out["uniform_error"] = uniform_error_bound(params, budget).to_dict()
    if masses is not None:
        try:
            mass_array = np.asarray(json.loads(masses), dtype=float)
            cm_bounds = confusion_error_bounds(mass_array, budget)
        except (json.JSONDecodeError, ValueError) as exc:
            _fail_config(f"bad --masses: {exc}")
        out["confusion_errors"] = cm_bounds.to_dict()
    click.echo(json.dumps(out, indent=2))


@main.group()
def optimize():
    """Weight search maximizing dev/train macro-F1."""


def _objective_from_files(ctx, train_path, fit_path, k, has_header):
    from .metrics import macro_f1_from_scores
    from .knn import regress_batch

    train, _ = _load_dataset(train_path, has_header)
    fit = train if fit_path is None else _load_dataset(fit_path, has_header)[0]
    if k < 1 or k > train.n:
        _fail_config(f"k must lie in 1..{train.n}")
    model = KnnModel(train, k)
    eta = regress_batch(model, fit.features)

    def objective(q: WeightVector) -> float:
        return macro_f1_from_scores(eta, fit.labels, train.num_classes, q.q)

    return objective, train.num_classes


@optimize.command("greedy")
@click.option("--train", "train_path", type=click.Path(), required=True)
@click.option("--fit", "fit_path", type=click.Path(), default=None,
              help="Split the objective is evaluated on; defaults to train.")
@click.option("--k", type=int, required=True)
@click.option("--step-size", type=float, default=0.01, show_default=True)
@click.option("--steps", type=int, default=20, show_default=True)
@click.option("--initial", default=None, help="Comma-separated starting weights.")
@click.option("--has-header", is_flag=True)
@click.option("--trace-file", type=click.Path(), default=None)
@click.pass_context
def optimize_greedy(ctx, train_path, fit_path, k, step_size, steps, initial,
                    has_header, trace_file):
    """Greedy coordinate search over class weights."""
    objective, num_classes = _objective_from_files(ctx, train_path, fit_path, k, has_header)
    start = (_parse_weights(initial, num_classes) if initial
             else WeightVector(np.full(num_classes, 1.0 / num_classes)))
    best, trace = greedy_search(objective, GreedyConfig(step_size, steps, start))
    if trace_file:
        trace.write_csv(trace_file)
    click.echo(json.dumps({"weights": best.q.tolist(),
                           "metric": trace.accepted_metrics()[-1]
                           if trace.accepted_metrics() else trace.initial_metric}))


@optimize.command("grid")
@click.option("--train", "train_path", type=click.Path(), required=True)
@click.option("--fit", "fit_path", type=click.Path(), default=None)
@click.option("--k", type=int, required=True)
@click.option("--spacing", type=float, default=0.1, show_default=True)
@click.option("--min-weight", type=float, default=0.0, show_default=True)
@click.option("--has-header", is_flag=True)
@click.pass_context
def optimize_grid(ctx, train_path, fit_path, k, spacing, min_weight, has_header):
    """Exhaustive simplex-grid search over class weights."""
    objective, num_classes = _objective_from_files(ctx, train_path, fit_path, k, has_header)
    try:
        candidates = enumerate_simplex_grid(SimplexGrid(spacing, num_classes, min_weight))
        best, value = grid_search(objective, candidates)
    except (ValueError, DegenerateInputError) as exc:
        _fail_config(str(exc))
    click.echo(json.dumps({"weights": best.q.tolist(), "metric": value}))


@main.group()
def repro():
    """Reproduction harness for the reference experiments."""


@repro.command("section5")
@click.option("--epsilon", type=float, default=0.1, show_default=True)
@click.option("--marginal-grid", type=int, default=10000, show_default=True)
@click.option("--mass-grid", type=int, default=1000, show_default=True)
@click.pass_context
def repro_section5(ctx, epsilon, marginal_grid, mass_grid):
    report = experiments.run_bound_illustration(
        epsilon=epsilon, marginal_grid_size=marginal_grid,
        mass_grid_size=mass_grid, out_dir=ctx.obj["out"],
    )
    click.echo(json.dumps(report["results"], indent=2))


@repro.command("table1")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.pass_context
def repro_table1(ctx, trials):
    if trials < 1:
        _fail_config("--trials must be positive")
    report = experiments.run_table1(
        trials=trials, master_seed=ctx.obj["seed"] or 20240501, out_dir=ctx.obj["out"],
    )
    click.echo(json.dumps(report["results"], indent=2))


@repro.command("figure3")
@click.option("--mode", type=click.Choice(["steps", "samples"]), default="steps",
              show_default=True)
@click.option("--trials", type=int, default=50, show_default=True)
@click.pass_context
def repro_figure3(ctx, mode, trials):
    report = experiments.run_greedy_sweep(
        mode=mode, trials=trials, master_seed=ctx.obj["seed"] or 20240502,
        out_dir=ctx.obj["out"],
    )
    click.echo(json.dumps(report["results"], indent=2))


@repro.command("covertype")
@click.option("--data", "data_path", type=click.Path(), required=True,
              help="Path to the UCI covtype.data file.")
@click.option("--k", type=int, default=160, show_default=True)
@click.option("--no-standardize", is_flag=True)
@click.pass_context
def repro_covertype(ctx, data_path, k, no_standardize):
    if not Path(data_path).exists():
        _fail_data(f"Covertype file not found: {data_path}")
    try:
        report = experiments.run_covertype(
            data_path, k=k, standardize_features=not no_standardize,
            out_dir=ctx.obj["out"],
        )
    except DataFormatError as exc:
        _fail_data(str(exc))
    click.echo(json.dumps(report["results"], indent=2))


if __name__ == "__main__":
    main()
