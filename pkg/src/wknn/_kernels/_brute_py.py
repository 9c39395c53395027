"""Pure-NumPy twin of the compiled neighbor-count kernel.

Same contract as _brute.label_counts: k nearest by squared Euclidean
distance, ties broken by smaller training index (stable sort), label counts
per query. Queries are processed in chunks to bound memory.
"""

from __future__ import annotations

import numpy as np

_QUERY_CHUNK = 256
_FEATURE_CHUNK = 16


def label_counts(
    train: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    queries: np.ndarray,
    k: int,
) -> np.ndarray:
    """Return an (m, C) int64 matrix of label counts among the k nearest neighbors."""
    train = np.ascontiguousarray(train, dtype=np.float64)
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, d = train.shape
    if queries.ndim != 2 or queries.shape[1] != d:
        raise ValueError("query dimension does not match training dimension")
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")

    m = queries.shape[0]
    counts = np.zeros((m, num_classes), dtype=np.int64)
    labels0 = labels - 1
    for start in range(0, m, _QUERY_CHUNK):
        chunk = queries[start : start + _QUERY_CHUNK]
        d2 = np.zeros((chunk.shape[0], n), dtype=np.float64)
        for f in range(0, d, _FEATURE_CHUNK):
            diff = chunk[:, None, f : f + _FEATURE_CHUNK] - train[None, :, f : f + _FEATURE_CHUNK]
            d2 += np.einsum("qnf,qnf->qn", diff, diff)
        # stable sort keeps the smaller training index first on exact ties
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        neighbor_labels = labels0[nearest]
        for c in range(num_classes):
            counts[start : start + chunk.shape[0], c] = (neighbor_labels == c).sum(axis=1)
    return counts
