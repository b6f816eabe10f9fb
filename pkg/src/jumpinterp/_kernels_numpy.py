"""Vectorised numpy versions of the loop kernels in ``_kernels_numba``."""

import numpy as np


def greedy_jumps(D, lam):
    n = D.shape[0]
    times = [0]
    anchor = 0
    row = D[0]
    while True:
        hits = np.flatnonzero(row[anchor + 1:] >= lam)
        if hits.size == 0:
            break
        anchor = anchor + 1 + int(hits[0])
        times.append(anchor)
        row = D[anchor]
        if anchor >= n - 1:
            break
    return len(times) - 1, np.asarray(times, dtype=np.int64)


def exact_jumps(D, lam):
    n = D.shape[0]
    best = np.zeros(n, dtype=np.int64)
    link = np.full(n, -1, dtype=np.int64)
    ok = D >= lam
    for j in range(1, n):
        cand = np.where(ok[:j, j], best[:j] + 1, 0)
        i = int(np.argmax(cand))
        if cand[i] > 0:
            best[j] = cand[i]
            link[j] = i
    end = int(np.argmax(best))
    path = [end]
    while link[path[-1]] >= 0:
        path.append(int(link[path[-1]]))
    return int(best[end]), np.asarray(path[::-1], dtype=np.int64)


def jump_levels(D):
    n = D.shape[0]
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    prev = np.full(n, np.inf)
    levels = []
    for _ in range(1, n):
        cur = np.where(upper, np.minimum(prev[:, None], D), 0.0).max(axis=0)
        top = float(cur.max())
        if top <= 0.0:
            break
        levels.append(top)
        prev = cur
    return np.asarray(levels)


def jump_levels_many(D3):
    A, n = D3.shape[0], D3.shape[1]
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    prev = np.full((A, n), np.inf)
    out = np.zeros((A, max(n - 1, 0)))
    for k in range(n - 1):
        cur = np.where(upper[None], np.minimum(prev[:, :, None], D3), 0.0).max(axis=1)
        out[:, k] = cur.max(axis=1)
        prev = cur
    return out


def variation_dp(D, r):
    n = D.shape[0]
    best = np.zeros(n)
    link = np.full(n, -1, dtype=np.int64)
    P = D ** r
    for j in range(1, n):
        cand = best[:j] + P[:j, j]
        i = int(np.argmax(cand))
        best[j] = cand[i]
        link[j] = i
    end = int(np.argmax(best))
    if best[end] == 0.0:
        return 0.0, np.zeros(1, dtype=np.int64)
    path = []
    j = end
    while j >= 0:
        path.append(j)
        j = int(link[j])
    return float(best[end]), np.asarray(path[::-1], dtype=np.int64)


def tube_variation(f, eps, s):
    n = f.shape[0]
    half = 0.5 * np.asarray(eps, dtype=float)
    lo = np.full(half.shape, -np.inf)
    hi = np.full(half.shape, np.inf)
    start = np.zeros(half.shape)
    moved = np.zeros(half.shape, dtype=bool)
    for t in range(n):
        nlo = np.maximum(lo, f[t] - half)
        nhi = np.minimum(hi, f[t] + half)
        fresh = (nlo > nhi) & ~moved
        start = np.where(fresh, np.where(f[t] - half > hi, hi, lo), start)
        moved |= fresh
        lo = np.where(moved, lo, nlo)
        hi = np.where(moved, hi, nhi)
    g = np.empty((n,) + half.shape)
    g[0] = start
    for t in range(1, n):
        g[t] = np.clip(g[t - 1], f[t] - half, f[t] + half)
    best = np.zeros_like(g)
    for j in range(1, n):
        cand = best[:j] + np.abs(g[j] - g[:j]) ** s
        best[j] = cand.max(axis=0)
    out = best.max(axis=0) ** (1.0 / s)
    return np.where(moved, out, 0.0)


def lazy_path(f, eps):
    """The path used by ``tube_variation`` for one budget ``eps``.

    Stays constant while the tubes ``[f(t) - eps/2, f(t) + eps/2]`` still
    intersect, starting at the end of the intersection facing the first
    point that leaves it, then moves only when forced.
    """
    half = 0.5 * float(eps)
    lo, hi = -np.inf, np.inf
    start = None
    for t in range(f.shape[0]):
        nlo, nhi = max(lo, f[t] - half), min(hi, f[t] + half)
        if nlo > nhi:
            start = hi if f[t] - half > hi else lo
            break
        lo, hi = nlo, nhi
    if start is None:
        return np.full(f.shape[0], lo)
    g = np.empty(f.shape[0])
    g[0] = start
    for t in range(1, f.shape[0]):
        g[t] = min(max(g[t - 1], f[t] - half), f[t] + half)
    return g
