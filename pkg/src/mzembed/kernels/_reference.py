"""Pure-Python modified-cosine peak matching.

This is the fallback for the compiled extension in _matching.pyx. The
two implementations follow the same algorithm step for step, including
summation order, so their results are bit-identical; tests assert that.
"""

from __future__ import annotations

import math

import numpy as np


def score_modified_cosine(mz_a, int_a, mz_b, int_b, prec_diff, tol, exact_limit=12):
    """Modified cosine score between two peak lists.

    Peaks i (from a) and j (from b) are pairable when their m/z
    difference, directly or shifted by the precursor mass difference
    prec_diff, is within tol. Each pair weighs sqrt(Ia)*sqrt(Ib); the
    score is the total weight of a maximal one-to-one matching divided
    by sqrt(sum Ia) * sqrt(sum Ib). Matchings with at most exact_limit
    candidate pairs are solved exactly; larger ones greedily by
    descending weight with ties broken by (i, j).
    """
    mz_a = np.ascontiguousarray(mz_a, dtype=np.float64)
    int_a = np.ascontiguousarray(int_a, dtype=np.float64)
    mz_b = np.ascontiguousarray(mz_b, dtype=np.float64)
    int_b = np.ascontiguousarray(int_b, dtype=np.float64)
    n_a, n_b = mz_a.shape[0], mz_b.shape[0]

    sum_a = 0.0
    for i in range(n_a):
        sum_a += int_a[i]
    sum_b = 0.0
    for j in range(n_b):
        sum_b += int_b[j]
    denom = math.sqrt(sum_a) * math.sqrt(sum_b)
    if denom == 0.0:
        return 0.0

    cand_w = []
    cand_i = []
    cand_j = []
    for i in range(n_a):
        for j in range(n_b):
            diff = mz_a[i] - mz_b[j]
            if abs(diff) <= tol or abs(diff - prec_diff) <= tol:
                cand_w.append(math.sqrt(int_a[i]) * math.sqrt(int_b[j]))
                cand_i.append(i)
                cand_j.append(j)
    if not cand_w:
        return 0.0

    w = np.array(cand_w, dtype=np.float64)
    ii = np.array(cand_i, dtype=np.int64)
    jj = np.array(cand_j, dtype=np.int64)
    order = np.lexsort((jj, ii, -w))
    w, ii, jj = w[order], ii[order], jj[order]
    n = w.shape[0]

    if n <= exact_limit:
        total = _exact_best(w, ii, jj, n)
    else:
        used_a = np.zeros(n_a, dtype=bool)
        used_b = np.zeros(n_b, dtype=bool)
        total = 0.0
        for k in range(n):
            if not used_a[ii[k]] and not used_b[jj[k]]:
                used_a[ii[k]] = True
                used_b[jj[k]] = True
                total += w[k]

    score = total / denom
    if score > 1.0:
        score = 1.0
    elif score < 0.0:
        score = 0.0
    return score


def _exact_best(w, ii, jj, n):
    """Maximum-weight one-to-one matching over candidate pairs, by search.

    Candidates arrive sorted by descending weight. suffix[k] bounds what
    positions k.. can still add, pruning hopeless branches.
    """
    suffix = np.zeros(n + 1, dtype=np.float64)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + w[k]

    best = [0.0]

    def walk(k, acc, used_a, used_b):
        if acc > best[0]:
            best[0] = acc
        if k == n or acc + suffix[k] <= best[0]:
            return
        i, j = int(ii[k]), int(jj[k])
        if i not in used_a and j not in used_b:
            used_a.add(i)
            used_b.add(j)
            walk(k + 1, acc + w[k], used_a, used_b)
            used_a.discard(i)
            used_b.discard(j)
        walk(k + 1, acc, used_a, used_b)

    walk(0, 0.0, set(), set())
    return best[0]
