"""Benchmark the compiled neighbor-count kernel against its pure-NumPy twin.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times label_counts on a range of (training size, query count, dimension)
shapes and verifies both backends return identical counts.
"""

import argparse
import time

import numpy as np

from wknn._kernels import _brute_py

try:
    from wknn._kernels import _brute as _brute_c
except ImportError:
    _brute_c = None

CASES = [
    # (n_train, n_queries, dim, k)
    (1000, 1000, 1, 50),
    (1000, 1000, 10, 50),
    (10000, 1000, 10, 100),
    (11340, 3780, 54, 160),
]


def bench(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    opts = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'case':>28} {'numpy':>10} {'cython':>10} {'speedup':>8}")
    for n, m, d, k in CASES:
        train = rng.random((n, d))
        labels = rng.integers(1, 8, n).astype(np.int64)
        queries = rng.random((m, d))
        args = (train, labels, 7, queries, k)
        t_py = bench(_brute_py.label_counts, args, opts.repeats)
        label = f"n={n} m={m} d={d} k={k}"
        if _brute_c is None:
            print(f"{label:>28} {t_py:9.3f}s {'missing':>10} {'-':>8}")
            continue
        t_c = bench(_brute_c.label_counts, args, opts.repeats)
        same = np.array_equal(_brute_py.label_counts(*args),
                              _brute_c.label_counts(*args))
        ratio = t_py / t_c if t_c > 0 else float("inf")
        print(f"{label:>28} {t_py:9.3f}s {t_c:9.3f}s {ratio:7.1f}x"
              + ("" if same else "  MISMATCH"))


if __name__ == "__main__":
    main()
