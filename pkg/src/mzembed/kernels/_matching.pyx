# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled modified-cosine peak matching.

Mirrors _reference.py operation for operation (same candidate order,
same summation order, same pruning rule) so both backends return
bit-identical scores. Keep the two files in lockstep when editing.
"""

from libc.math cimport fabs, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def score_modified_cosine(mz_a, int_a, mz_b, int_b, double prec_diff, double tol,
                          Py_ssize_t exact_limit=12):
    """Modified cosine score between two peak lists.

    See the reference implementation for the full contract; this is the
    accelerated twin selected automatically at import time.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_mz = np.ascontiguousarray(mz_a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_in = np.ascontiguousarray(int_a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b_mz = np.ascontiguousarray(mz_b, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b_in = np.ascontiguousarray(int_b, dtype=np.float64)
    cdef Py_ssize_t n_a = a_mz.shape[0]
    cdef Py_ssize_t n_b = b_mz.shape[0]
    cdef Py_ssize_t i, j, k, n

    cdef double sum_a = 0.0
    for i in range(n_a):
        sum_a += a_in[i]
    cdef double sum_b = 0.0
    for j in range(n_b):
        sum_b += b_in[j]
    cdef double denom = sqrt(sum_a) * sqrt(sum_b)
    if denom == 0.0:
        return 0.0

    # Candidate generation: count first, then fill fixed-size arrays.
    cdef Py_ssize_t count = 0
    cdef double diff
    for i in range(n_a):
        for j in range(n_b):
            diff = a_mz[i] - b_mz[j]
            if fabs(diff) <= tol or fabs(diff - prec_diff) <= tol:
                count += 1
    if count == 0:
        return 0.0

    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(count, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ii = np.empty(count, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] jj = np.empty(count, dtype=np.int64)
    k = 0
    for i in range(n_a):
        for j in range(n_b):
            diff = a_mz[i] - b_mz[j]
            if fabs(diff) <= tol or fabs(diff - prec_diff) <= tol:
                w[k] = sqrt(a_in[i]) * sqrt(b_in[j])
                ii[k] = i
                jj[k] = j
                k += 1

    cdef cnp.ndarray[cnp.intp_t, ndim=1] order = np.lexsort((jj, ii, -w))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ws = np.ascontiguousarray(w[order])
    cdef cnp.ndarray[cnp.int64_t, ndim=1] iis = np.ascontiguousarray(ii[order])
    cdef cnp.ndarray[cnp.int64_t, ndim=1] jjs = np.ascontiguousarray(jj[order])
    n = count

    cdef double total
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_a
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_b
    if n <= exact_limit:
        total = _exact_best(ws, iis, jjs, n, n_a, n_b)
    else:
        used_a = np.zeros(n_a, dtype=np.uint8)
        used_b = np.zeros(n_b, dtype=np.uint8)
        total = 0.0
        for k in range(n):
            if used_a[iis[k]] == 0 and used_b[jjs[k]] == 0:
                used_a[iis[k]] = 1
                used_b[jjs[k]] = 1
                total += ws[k]

    cdef double score = total / denom
    if score > 1.0:
        score = 1.0
    elif score < 0.0:
        score = 0.0
    return score


cdef double _exact_best(cnp.ndarray[cnp.float64_t, ndim=1] w,
                        cnp.ndarray[cnp.int64_t, ndim=1] ii,
                        cnp.ndarray[cnp.int64_t, ndim=1] jj,
                        Py_ssize_t n, Py_ssize_t n_a, Py_ssize_t n_b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] suffix = np.zeros(n + 1, dtype=np.float64)
    cdef Py_ssize_t k
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + w[k]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_a = np.zeros(n_a, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_b = np.zeros(n_b, dtype=np.uint8)
    cdef double best = 0.0
    _walk(0, 0.0, &best, w, ii, jj, suffix, used_a, used_b, n)
    return best


cdef void _walk(Py_ssize_t k, double acc, double* best,
                cnp.ndarray[cnp.float64_t, ndim=1] w,
                cnp.ndarray[cnp.int64_t, ndim=1] ii,
                cnp.ndarray[cnp.int64_t, ndim=1] jj,
                cnp.ndarray[cnp.float64_t, ndim=1] suffix,
                cnp.ndarray[cnp.uint8_t, ndim=1] used_a,
                cnp.ndarray[cnp.uint8_t, ndim=1] used_b,
                Py_ssize_t n):
    if acc > best[0]:
        best[0] = acc
    if k == n or acc + suffix[k] <= best[0]:
        return
    cdef Py_ssize_t i = ii[k]
    cdef Py_ssize_t j = jj[k]
    if used_a[i] == 0 and used_b[j] == 0:
        used_a[i] = 1
        used_b[j] = 1
        _walk(k + 1, acc + w[k], best, w, ii, jj, suffix, used_a, used_b, n)
        used_a[i] = 0
        used_b[j] = 0
    _walk(k + 1, acc, best, w, ii, jj, suffix, used_a, used_b, n)
