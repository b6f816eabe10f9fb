"""Exhaustive oracles over all increasing subsequences (n <= 16).

These enumerate every subset of the index set, so they share nothing with
the greedy scan or the dynamic programme they are used to check.
"""

from functools import lru_cache

import numpy as np

from .errors import DomainError

MAX_N = 16


@lru_cache(maxsize=None)
def _subset_links(n):
    """For each nonempty subset: flat indices of its consecutive pairs.

    Returns ``(links, sizes)`` with ``links`` of shape ``(2^n - 1, n - 1)``;
    unused slots hold ``n * n``, one past the end of a flattened ``D``.
    """
    if n > MAX_N:
        raise DomainError(f"exhaustive enumeration limited to n <= {MAX_N}")
    masks = np.arange(1, 2 ** n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    sizes = bits.sum(axis=1)
    # positions of set bits, in increasing order, padded with n
    order = np.where(bits == 1, np.arange(n), n)
    order.sort(axis=1)
    links = np.full((masks.size, max(n - 1, 1)), n * n, dtype=np.int64)
    if n > 1:
        a, b = order[:, :-1], order[:, 1:]
        valid = b < n
        links[:, : n - 1] = np.where(valid, a * n + b, n * n)
    links.setflags(write=False)
    return links, sizes - 1


def brute_jump_counts(D, lams):
    """Max J over all increasing sequences with every consecutive jump >= lam."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    links, counts = _subset_links(n)
    flat = np.append(D.ravel(), np.inf)
    weakest = flat[links].min(axis=1)
    order = np.argsort(-weakest, kind="stable")
    runmax = np.maximum.accumulate(counts[order])
    # number of subsets whose weakest link is >= lam
    k = np.searchsorted(-weakest[order], -lams, side="right")
    return runmax[np.maximum(k, 1) - 1]


def brute_variation(D, r):
    """sup over increasing sequences of (sum ||jump||^r)^(1/r); r may be inf."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if n == 1:
        return 0.0
    if np.isinf(r):
        links, counts = _subset_links(n)
        pairs = links[counts == 1, 0]
        return float(D.ravel()[pairs].max())
    links, _ = _subset_links(n)
    flat = np.append(D.ravel() ** r, 0.0)
    return float(flat[links].sum(axis=1).max()) ** (1.0 / r)
