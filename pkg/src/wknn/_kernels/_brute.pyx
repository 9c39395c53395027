# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Brute-force neighbor-count kernel.

For each query, finds the k training points with smallest squared Euclidean
distance (ties broken by smaller training index) and counts their labels.
This is the hot inner loop of every experiment; the pure-NumPy twin lives in
_brute_py and must produce identical output.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline bint _worse(double da, Py_ssize_t ia, double db, Py_ssize_t ib) noexcept nogil:
    # (da, ia) strictly worse than (db, ib) under the (distance, index) order
    if da != db:
        return da > db
    return ia > ib


cdef void _heap_sift_down(double* hd, Py_ssize_t* hi, Py_ssize_t k, Py_ssize_t pos) noexcept nogil:
    # max-heap on (distance, index); root holds the current worst neighbor
    cdef Py_ssize_t child
    cdef double d
    cdef Py_ssize_t i
    d = hd[pos]
    i = hi[pos]
    while True:
        child = 2 * pos + 1
        if child >= k:
            break
        if child + 1 < k and _worse(hd[child + 1], hi[child + 1], hd[child], hi[child]):
            child += 1
        if _worse(hd[child], hi[child], d, i):
            hd[pos] = hd[child]
            hi[pos] = hi[child]
            pos = child
        else:
            break
    hd[pos] = d
    hi[pos] = i


def label_counts(const double[:, ::1] train, const cnp.int64_t[::1] labels, int num_classes,
                 const double[:, ::1] queries, Py_ssize_t k):
    """Return an (m, C) int64 matrix of label counts among the k nearest neighbors."""
    cdef Py_ssize_t n = train.shape[0]
    cdef Py_ssize_t d = train.shape[1]
    cdef Py_ssize_t m = queries.shape[0]
    if queries.shape[1] != d:
        raise ValueError("query dimension does not match training dimension")
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")

    counts_arr = np.zeros((m, num_classes), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = counts_arr
    heap_d_arr = np.empty(k, dtype=np.float64)
    heap_i_arr = np.empty(k, dtype=np.intp)
    cdef double[::1] heap_d = heap_d_arr
    cdef Py_ssize_t[::1] heap_i = heap_i_arr

    cdef Py_ssize_t qi, i, j, t
    cdef double dist, diff
    with nogil:
        for qi in range(m):
            for i in range(n):
                dist = 0.0
                for j in range(d):
                    diff = train[i, j] - queries[qi, j]
                    dist += diff * diff
                if i < k:
                    heap_d[i] = dist
                    heap_i[i] = i
                    if i == k - 1:
                        for t in range(k // 2 - 1, -1, -1):
                            _heap_sift_down(&heap_d[0], &heap_i[0], k, t)
                elif _worse(heap_d[0], heap_i[0], dist, i):
                    heap_d[0] = dist
                    heap_i[0] = i
                    _heap_sift_down(&heap_d[0], &heap_i[0], k, 0)
            for t in range(k):
                counts[qi, labels[heap_i[t]] - 1] += 1
    return counts_arr
