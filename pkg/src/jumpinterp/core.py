"""Jump counts and r-variation of a single B-valued sequence.

B is realised as R^m with an l^s norm.  All quantities are computed from the
matrix of pairwise distances ``D[i, j] = ||f(t_j) - f(t_i)||``, so the
exactness arguments (the chain DP for N_lambda, piecewise constancy in lambda) are
statements about comparisons between entries of ``D``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DomainError, InputError

__all__ = [
    "BNorm",
    "TimeSeries",
    "JumpWitness",
    "Variation",
    "jump_count",
    "greedy_jump_count",
    "jump_levels",
    "jump_breakpoints",
    "variation",
    "sum_norm_bound",
]


@dataclass(frozen=True)
class BNorm:
    """The l^s norm on R^m."""

    m: int = 1
    s: float = 2.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.m}")
        if not (self.s >= 1):
            raise DomainError(f"norm exponent must lie in [1, inf], got {self.s}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "s", float(self.s))

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if self.m == 1 and v.shape[-1:] == (1,):
            return np.abs(v[..., 0])
        return np.linalg.norm(v, ord=self.s, axis=-1)

    def pairwise(self, values):
        """Matrix of ``||values[j] - values[i]||`` for a stack of m-vectors."""
        values = np.asarray(values, dtype=float)
        return self(values[None, :, :] - values[:, None, :])

    def to_dict(self):
        return {"m": self.m, "s": "inf" if np.isinf(self.s) else self.s}

    @classmethod
    def from_dict(cls, d):
        s = d.get("s", 2.0)
        return cls(m=int(d.get("m", 1)), s=float(s))


def _as_values(values, m=None):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"values must be a sequence of m-tuples, got shape {arr.shape}")
    if m is not None and arr.shape[1] != m:
        raise InputError(f"values have dimension {arr.shape[1]}, norm expects {m}")
    if not np.all(np.isfinite(arr)):
        raise InputError("values must be finite")
    return arr


@dataclass(eq=False)
class TimeSeries:
    """A finite ordered index set with one point of R^m per index."""

    values: np.ndarray
    labels: np.ndarray = None
    bnorm: BNorm = None

    def __post_init__(self):
        m = self.bnorm.m if self.bnorm is not None else None
        self.values = _as_values(self.values, m)
        if self.bnorm is None:
            self.bnorm = BNorm(m=self.values.shape[1])
        n = self.values.shape[0]
        if n == 0:
            raise DomainError("time series must be nonempty")
        if self.labels is None:
            self.labels = np.arange(n)
        self.labels = np.asarray(self.labels)
        if self.labels.shape != (n,):
            raise InputError("need exactly one label per value")
        if n > 1 and not np.all(self.labels[1:] > self.labels[:-1]):
            raise InputError("labels must be strictly increasing")

    @classmethod
    def scalar(cls, seq, labels=None):
        return cls(np.asarray(seq, dtype=float)[:, None], labels)

    def __len__(self):
        return self.values.shape[0]

    @cached_property
    def distances(self):
        return self.bnorm.pairwise(self.values)

    def shifted(self, b):
        return TimeSeries(self.values + np.asarray(b, dtype=float), self.labels, self.bnorm)

    def restricted(self, keep):
        keep = np.asarray(keep)
        return TimeSeries(self.values[keep], self.labels[keep], self.bnorm)

    def to_dict(self):
        return {
            "labels": self.labels.tolist(),
            "values": self.values.tolist(),
            "norm": self.bnorm.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        bnorm = BNorm.from_dict(d["norm"]) if "norm" in d else None
        return cls(d["values"], d.get("labels"), bnorm)


@dataclass
class JumpWitness:
    """Times ``t_0 < ... < t_J`` whose consecutive jumps all have size >= lam."""

    count: int
    times: list
    indices: np.ndarray = field(repr=False, default=None)

    def certifies(self, ts, lam):
        idx = np.asarray(self.indices)
        if self.count != len(idx) - 1:
            return False
        if len(idx) > 1 and not np.all(idx[1:] > idx[:-1]):
            return False
        if self.count == 0:
            return True
        return bool(np.all(ts.distances[idx[:-1], idx[1:]] >= lam))


class Variation(NamedTuple):
    value: float
    times: list


def jump_count(ts, lam):
    """Lambda-jump count N_lam and a sequence of times realising it.

    N_lam is the longest chain ``t_0 < ... < t_J`` whose consecutive values
    are at distance ``>= lam``, found by dynamic programming over the
    distance matrix.  Ties go to the earliest admissible predecessor.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    count, idx = kernels.exact_jumps(ts.distances, float(lam))
    count = int(count)
    return count, JumpWitness(count, ts.labels[idx].tolist(), np.asarray(idx))


def greedy_jump_count(ts, lam):
    """Count of the greedy stopping times at level ``lam``.

    ``t_0 = min I`` and ``t_{k+1}`` is the first later index with
    ``||f(t) - f(t_k)|| >= lam``.  This is a lower bound for N_lam and in
    general not equal to it; ``N_lam <= greedy_jump_count(ts, lam / 2)``.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    count, idx = kernels.greedy_jumps(ts.distances, float(lam))
    return int(count), JumpWitness(int(count), ts.labels[idx].tolist(), np.asarray(idx))


def jump_levels(ts):
    """``levels[k-1] = max{lam : N_lam >= k}``, nonincreasing in ``k``."""
    return kernels.jump_levels(ts.distances)


def jump_breakpoints(ts):
    """Sorted distinct nonzero pairwise distances.

    ``lam -> N_lam`` is constant on every interval ``(b_i, b_{i+1}]`` between
    consecutive returned values, and vanishes above the largest one.
    """
    upper = ts.distances[np.triu_indices(len(ts), k=1)]
    return np.unique(upper[upper > 0])


def variation(ts, r):
    """r-variation seminorm, ``0 < r <= inf``, with a maximising subsequence."""
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    n = len(ts)
    if n == 1:
        return Variation(0.0, ts.labels[:1].tolist())
    D = ts.distances
    if np.isinf(r):
        flat = int(np.argmax(np.triu(D, k=1)))
        i, j = divmod(flat, n)
        if D[i, j] == 0.0:
            return Variation(0.0, ts.labels[:1].tolist())
        return Variation(float(D[i, j]), ts.labels[[i, j]].tolist())
    total, path = kernels.variation_dp(D, float(r))
    return Variation(float(total) ** (1.0 / r), ts.labels[np.asarray(path)].tolist())


def variation_power(ts, r):
    """``variation(ts, r).value ** r`` without the final root (finite r)."""
    if len(ts) == 1:
        return 0.0
    total, _ = kernels.variation_dp(ts.distances, float(r))
    return float(total)


def sum_norm_bound(ts, r):
    """``2 (sum_j ||f(j)||^r)^(1/r)``, an upper bound for V^r when r >= 1."""
    if not 1 <= r < np.inf:
        raise DomainError("bound holds for 1 <= r < inf")
    return 2.0 * float(np.sum(ts.bnorm(ts.values) ** r)) ** (1.0 / r)
