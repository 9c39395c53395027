"""Dataset ingestion: generic CSV, the Covertype layout, splits, and
feature standardization."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .core import Dataset
from .errors import DataFormatError, DegenerateInputError

COVERTYPE_FEATURES = 54
COVERTYPE_CLASSES = 7
COVERTYPE_ROWS = 581012
COVERTYPE_SPLIT = (11340, 3780, 565892)  # canonical fixed-prefix train/dev/test
COVERTYPE_CONTINUOUS = 10  # leading continuous columns; the rest are binary


@dataclass(frozen=True)
class SplitSpec:
    """Train/dev/test sizes; fixed-prefix keeps file order, shuffled permutes."""

    sizes: tuple[int, ...]
    mode: str = "fixed-prefix"
    seed: int = 0

    def __post_init__(self):
        if any(s < 1 for s in self.sizes):
            raise ValueError("split sizes must be positive")
        if self.mode not in ("fixed-prefix", "shuffled"):
            raise ValueError(f"unknown split mode {self.mode!r}")


@dataclass(frozen=True)
class StandardizationParams:
    """Per-feature training mean/std (population std, divide by n)."""

    mean: np.ndarray
    std: np.ndarray
    columns: np.ndarray  # indices of standardized columns


def load_csv(path, label_column=-1, has_header: bool = False) -> tuple[Dataset, list]:
    """Load a dataset from CSV.

    label_column may be an index or, with a header, a column name. Integer
    labels are used as-is (must already be 1..C contiguous after factoring);
    non-integer labels are factorized in first-appearance order. Returns the
    dataset and the list mapping 1-based class index -> original label.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if has_header:
        if not rows:
            raise DataFormatError(f"{path}: empty file")
        header = rows[0]
        rows = rows[1:]
        if isinstance(label_column, str):
            try:
                label_column = header.index(label_column)
            except ValueError:
                raise DataFormatError(f"{path}: no column named {label_column!r}") from None
    elif isinstance(label_column, str):
        raise DataFormatError("label_column by name requires has_header=True")
    if not rows:
        raise DegenerateInputError(f"{path}: no data rows")

    width = len(rows[0])
    if not -width <= label_column < width:
        raise DataFormatError(f"{path}: label column {label_column} out of range")
    label_column %= width

    raw_labels: list[str] = []
    features = np.empty((len(rows), width - 1), dtype=np.float64)
    for r, row in enumerate(rows):
        rownum = r + 1 + int(has_header)
        if len(row) != width:
            raise DataFormatError(
                f"{path}: row {rownum} has {len(row)} columns, expected {width}"
            )
        raw_labels.append(row[label_column])
        j = 0
        for col, cell in enumerate(row):
            if col == label_column:
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {rownum}, column {col}: cannot parse {cell!r}"
                ) from None
            if not math.isfinite(value):
                raise DataFormatError(
                    f"{path}: row {rownum}, column {col}: non-finite value {cell!r}"
                )
            features[r, j] = value
            j += 1

    labels, mapping = _factorize_labels(raw_labels)
    if len(mapping) < 2:
        raise DataFormatError(f"{path}: need at least two distinct labels")
    return Dataset(features, labels, len(mapping)), mapping


def _factorize_labels(raw_labels: list[str]) -> tuple[np.ndarray, list]:
    # integer labels that already form a contiguous 1..C range are kept as-is;
    # anything else is factorized in first-appearance order
    try:
        ints = [int(lab) for lab in raw_labels]
    except ValueError:
        ints = None
    if ints is not None and min(ints) >= 1 and set(ints) == set(range(1, max(ints) + 1)):
        return np.asarray(ints, dtype=np.int64), list(range(1, max(ints) + 1))
    mapping: list = []
    index: dict = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for r, lab in enumerate(raw_labels):
        if lab not in index:
            index[lab] = len(mapping) + 1
            mapping.append(lab)
        labels[r] = index[lab]
    return labels, mapping


def write_csv(dataset: Dataset, path, label_mapping: list | None = None) -> None:
    """Write features plus a trailing label column; floats use repr so that a
    reload reproduces the dataset bit-for-bit."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row, label in zip(dataset.features, dataset.labels):
            original = label_mapping[label - 1] if label_mapping else int(label)
            writer.writerow([repr(v) for v in row.tolist()] + [original])


def split(dataset: Dataset, spec: SplitSpec) -> list[Dataset]:
    """Disjoint splits covering exactly sum(sizes) rows."""
    total = sum(spec.sizes)
    if total > dataset.n:
        raise DegenerateInputError(f"split sizes sum to {total} but dataset has {dataset.n}")
    if spec.mode == "shuffled":
        order = np.random.default_rng(spec.seed).permutation(dataset.n)
    else:
        order = np.arange(dataset.n)
    out = []
    start = 0
    for size in spec.sizes:
        idx = order[start : start + size]
        out.append(Dataset(dataset.features[idx], dataset.labels[idx], dataset.num_classes))
        start += size
    return out


def load_covertype(path) -> tuple[Dataset, Dataset, Dataset]:
    """Load UCI covtype.data and apply the canonical fixed-prefix split."""
    try:
        frame = pd.read_csv(path, header=None)
    except Exception as exc:
        raise DataFormatError(f"{path}: cannot parse as CSV: {exc}") from exc
    if frame.shape[1] != COVERTYPE_FEATURES + 1:
        raise DataFormatError(
            f"{path}: expected {COVERTYPE_FEATURES + 1} columns, found {frame.shape[1]}"
        )
    if frame.shape[0] != COVERTYPE_ROWS:
        raise DataFormatError(
            f"{path}: expected {COVERTYPE_ROWS} rows, found {frame.shape[0]}"
        )
    labels = frame.iloc[:, -1].to_numpy()
    if labels.min() < 1 or labels.max() > COVERTYPE_CLASSES:
        raise DataFormatError(f"{path}: labels outside 1..{COVERTYPE_CLASSES}")
    features = frame.iloc[:, :-1].to_numpy(dtype=np.float64)
    full = Dataset(features, labels.astype(np.int64), COVERTYPE_CLASSES)
    train, dev, test = split(full, SplitSpec(COVERTYPE_SPLIT, mode="fixed-prefix"))
    return train, dev, test


def standardize(train: Dataset, others: tuple[Dataset, ...] = (),
                columns=None) -> tuple[list[Dataset], StandardizationParams]:
    """Z-score features using training statistics only.

    columns selects which features to standardize (default all); zero-std
    features map to zero after centering. Returns [train, *others]
    standardized plus the parameters.
    """
    if columns is None:
        columns = np.arange(train.dim)
    else:
        columns = np.asarray(columns, dtype=np.int64)
    mean = train.features[:, columns].mean(axis=0)
    std = train.features[:, columns].std(axis=0)  # population (divide by n)
    safe_std = np.where(std > 0, std, 1.0)

    def apply(ds: Dataset) -> Dataset:
        feats = ds.features.copy()
        centered = (feats[:, columns] - mean) / safe_std
        feats[:, columns] = np.where(std > 0, centered, 0.0)
        return Dataset(feats, ds.labels, ds.num_classes)

    params = StandardizationParams(mean, std, columns)
    return [apply(ds) for ds in (train, *others)], params
