"""Class-weighted k-nearest-neighbor classification with exact
confusion-matrix accounting, error-bound calculators, and weight search."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .core import (
    CoverPair,
    Dataset,
    ProbabilityVector,
    WeightVector,
    is_class_covered,
    normalize_to_simplex,
)
from .knn import KnnModel, NeighborSet, classify_batch, classify_weighted, knn_regress, \
    nearest_neighbors, regress_batch, suggest_k
from .metrics import ConfusionMatrix, MetricReport, empirical_confusion, \
    matrix_deviation, precision_recall_f1
from .population import EvaluationGrid, SyntheticDistribution, marginal_probs, \
    population_confusion, sample, section5_distribution, tnfn_error_masses
from .bounds import BoundBudget, MarginParams, SmoothnessParams, \
    accuracy_boundary_terms, confusion_error_bounds, metric_error_bounds, \
    uniform_error_bound
from .optimize import GreedyConfig, SearchTrace, SimplexGrid, enumerate_simplex_grid, \
    greedy_search, grid_search
from .data_io import SplitSpec, StandardizationParams, load_covertype, load_csv, \
    split, standardize, write_csv

__version__ = "0.1.0"
