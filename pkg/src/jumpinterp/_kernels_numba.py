"""Loop kernels compiled with numba.

Every function here has a twin with the same signature in
``_kernels_numpy``; tests assert that the two agree exactly.
"""

import numpy as np

from ._accel import njit


@njit
def greedy_jumps(D, lam):
    n = D.shape[0]
    times = np.empty(n, dtype=np.int64)
    times[0] = 0
    count = 0
    anchor = 0
    for t in range(1, n):
        if D[anchor, t] >= lam:
            count += 1
            times[count] = t
            anchor = t
    return count, times[:count + 1].copy()


@njit
def exact_jumps(D, lam):
    n = D.shape[0]
    best = np.zeros(n, dtype=np.int64)
    link = np.full(n, -1, dtype=np.int64)
    for j in range(1, n):
        for i in range(j):
            if D[i, j] >= lam and best[i] + 1 > best[j]:
                best[j] = best[i] + 1
                link[j] = i
    end = 0
    for j in range(n):
        if best[j] > best[end]:
            end = j
    count = best[end]
    path = np.empty(count + 1, dtype=np.int64)
    j = end
    for k in range(count, -1, -1):
        path[k] = j
        j = link[j]
    return count, path


@njit
def jump_levels(D):
    n = D.shape[0]
    prev = np.full(n, np.inf)
    cur = np.empty(n)
    levels = np.empty(max(n - 1, 0))
    K = 0
    for k in range(1, n):
        top = 0.0
        for j in range(n):
            b = 0.0
            for i in range(j):
                v = min(prev[i], D[i, j])
                if v > b:
                    b = v
            cur[j] = b
            if b > top:
                top = b
        if top <= 0.0:
            break
        levels[K] = top
        K += 1
        prev[:] = cur
    return levels[:K].copy()


@njit
def jump_levels_many(D3):
    A, n = D3.shape[0], D3.shape[1]
    out = np.zeros((A, max(n - 1, 0)))
    for a in range(A):
        lv = jump_levels(D3[a])
        out[a, : lv.shape[0]] = lv
    return out


@njit
def variation_dp(D, r):
    n = D.shape[0]
    best = np.zeros(n)
    link = np.full(n, -1, dtype=np.int64)
    for j in range(1, n):
        top = -1.0
        arg = -1
        for i in range(j):
            cand = best[i] + D[i, j] ** r
            if cand > top:
                top = cand
                arg = i
        best[j] = top
        link[j] = arg
    end = 0
    for j in range(1, n):
        if best[j] > best[end]:
            end = j
    if best[end] == 0.0:
        return 0.0, np.zeros(1, dtype=np.int64)
    path = np.empty(n, dtype=np.int64)
    k = 0
    j = end
    while j >= 0:
        path[k] = j
        k += 1
        j = link[j]
    return best[end], path[:k][::-1].copy()


@njit
def tube_variation(f, eps, s):
    n = f.shape[0]
    out = np.zeros(eps.shape[0])
    g = np.empty(n)
    best = np.empty(n)
    for e in range(eps.shape[0]):
        half = 0.5 * eps[e]
        lo = -np.inf
        hi = np.inf
        start = 0.0
        moved = False
        for t in range(n):
            nlo = max(lo, f[t] - half)
            nhi = min(hi, f[t] + half)
            if nlo > nhi:
                if f[t] - half > hi:
                    start = hi
                else:
                    start = lo
                moved = True
                break
            lo = nlo
            hi = nhi
        if not moved:
            out[e] = 0.0
            continue
        g[0] = start
        for t in range(1, n):
            v = g[t - 1]
            if v < f[t] - half:
                v = f[t] - half
            elif v > f[t] + half:
                v = f[t] + half
            g[t] = v
        best[0] = 0.0
        top_all = 0.0
        for j in range(1, n):
            top = 0.0
            for i in range(j):
                cand = best[i] + abs(g[j] - g[i]) ** s
                if cand > top:
                    top = cand
            best[j] = top
            if top > top_all:
                top_all = top
        out[e] = top_all ** (1.0 / s)
    return out
