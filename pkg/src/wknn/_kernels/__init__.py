"""Neighbor-search kernel selection.

Prefers the compiled Cython kernel; falls back to the pure-NumPy twin when
the extension is missing or when WKNN_PURE_PYTHON=1 is set. Both expose the
same label_counts contract and are tested for identical output.
"""

import os

from . import _brute_py

if os.environ.get("WKNN_PURE_PYTHON", "") == "1":
    BACKEND = "python"
    label_counts = _brute_py.label_counts
else:
    try:
        from . import _brute

        BACKEND = "cython"
        label_counts = _brute.label_counts
    except ImportError:
        BACKEND = "python"
        label_counts = _brute_py.label_counts

__all__ = ["BACKEND", "label_counts"]
