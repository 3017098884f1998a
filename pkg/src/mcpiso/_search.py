"""Compiled kernels for the exhaustive minimal-perimeter search.

Grid points ``0..n-1`` carry a cumulative mass ``C`` (nondecreasing) and a
boundary cost ``c`` (zero at both domain endpoints). A set made of grid
intervals ``[i, j]`` has mass ``sum C[j] - C[i]`` and perimeter ``sum c[i] + c[j]``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def best_single(C, c, lo_m, hi_m):
    n = C.size
    best = np.inf
    bi = -1
    bj = -1
    for i in range(n - 1):
        j = np.searchsorted(C, C[i] + lo_m)
        if j <= i:
            j = i + 1
        while j < n and C[j] - C[i] <= hi_m:
            if C[j] - C[i] >= lo_m:
                cost = c[i] + c[j]
                if cost < best:
                    best = cost
                    bi = i
                    bj = j
            j += 1
    return best, bi, bj


@njit(cache=True)
def _tree_update(val, arg, size, pos, cost, ident):
    node = pos + size
    if cost >= val[node]:
        return
    val[node] = cost
    arg[node] = ident
    node //= 2
    while node >= 1:
        left = 2 * node
        right = left + 1
        if val[left] <= val[right]:
            v, a = val[left], arg[left]
        else:
            v, a = val[right], arg[right]
        if val[node] == v and arg[node] == a:
            break
        val[node] = v
        arg[node] = a
        node //= 2


@njit(cache=True)
def _tree_query(val, arg, size, lo, hi):
    # minimum over leaf positions [lo, hi)
    best = np.inf
    who = -1
    lo += size
    hi += size
    while lo < hi:
        if lo & 1:
            if val[lo] < best:
                best = val[lo]
                who = arg[lo]
            lo += 1
        if hi & 1:
            hi -= 1
            if val[hi] < best:
                best = val[hi]
                who = arg[hi]
        lo //= 2
        hi //= 2
    return best, who


@njit(cache=True)
def best_pair(C, c, lo_m, hi_m, bound):
    """Cheapest union of two disjoint grid intervals with mass in ``[lo_m, hi_m]``.

    Only configurations cheaper than ``bound`` are searched: second
    intervals costing ``bound`` or more are never inserted and first
    intervals are skipped once they alone reach the running best.
    Returns ``(cost, i, j, k, l)`` with ``i < j < k < l``, or ``inf`` and -1s.
    """
    n = C.size
    count = 0
    for k in range(1, n - 1):
        if c[k] >= bound:
            continue
        for l in range(k + 1, n):
            if c[k] + c[l] < bound:
                count += 1
    ks = np.empty(count, np.int64)
    ls = np.empty(count, np.int64)
    ms = np.empty(count, np.float64)
    start = np.zeros(n + 1, np.int64)
    r = 0
    for k in range(n):
        start[k] = r
        if k == 0 or k == n - 1 or c[k] >= bound:
            continue
        for l in range(k + 1, n):
            if c[k] + c[l] < bound:
                ks[r] = k
                ls[r] = l
                ms[r] = C[l] - C[k]
                r += 1
    start[n] = r
    order = np.argsort(ms, kind="mergesort")
    sorted_m = ms[order]
    pos = np.empty(count, np.int64)
    for q in range(count):
        pos[order[q]] = q

    size = 1
    while size < max(count, 1):
        size *= 2
    val = np.full(2 * size, np.inf)
    arg = np.full(2 * size, -1, np.int64)

    best = bound
    bi = bj = bk = bl = -1
    for j in range(n - 2, 0, -1):
        k = j + 1
        for q in range(start[k], start[k + 1]):
            _tree_update(val, arg, size, pos[q], c[ks[q]] + c[ls[q]], q)
        if c[j] >= best:
            continue
        for i in range(j):
            first = c[i] + c[j]
            if first >= best:
                continue
            m1 = C[j] - C[i]
            lo = np.searchsorted(sorted_m, lo_m - m1)
            hi = np.searchsorted(sorted_m, hi_m - m1, side="right")
            if lo >= hi:
                continue
            second, q = _tree_query(val, arg, size, lo, hi)
            if q >= 0 and first + second < best:
                best = first + second
                bi, bj, bk, bl = i, j, ks[q], ls[q]
    if bi < 0:
        return np.inf, -1, -1, -1, -1
    return best, bi, bj, bk, bl
