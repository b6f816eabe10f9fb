"""Atomic measure spaces, Lorentz quasinorms and jump quasi-seminorms.

Lorentz quasinorm convention (decreasing rearrangement g*):

    ||g||_{p,q} = ( int_0^inf (t^(1/p) g*(t))^q dt/t )^(1/q),   q < inf
    ||g||_{p,inf} = sup_t t^(1/p) g*(t) = sup_lam lam * m(|g| > lam)^(1/p)

No ``(q/p)^(1/q)`` normalising factor; the quasinorm equals the L^p norm at
q = p.  On an atomic space g* is a step function and the integral is a
finite sum.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import kernels
from .core import BNorm, TimeSeries, variation, variation_power
from .errors import DomainError, InputError
from .report import Check, safe_ratio

__all__ = [
    "AtomicMeasureSpace",
    "SampledProcess",
    "JumpProfile",
    "NonnegProcess",
    "lorentz_norm",
    "lorentz_norm_rows",
    "weak_norm_levels",
    "jump_seminorm",
    "difference_jump_seminorm",
    "variation_lorentz_norm",
    "difference_process",
    "check_l1inf_logconvex",
    "check_lpinf_pconvex",
    "variation_from_jumps_report",
]


@dataclass(eq=False)
class AtomicMeasureSpace:
    weights: np.ndarray
    ids: list = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.weights.size == 0:
            raise InputError("measure space needs at least one atom")
        if not np.all(self.weights > 0) or not np.all(np.isfinite(self.weights)):
            raise InputError("atom weights must be finite and strictly positive")
        if self.ids is None:
            self.ids = list(range(self.weights.size))
        self.ids = list(self.ids)
        if len(self.ids) != self.weights.size or len(set(map(str, self.ids))) != len(self.ids):
            raise InputError("atom ids must be distinct, one per weight")

    @classmethod
    def uniform(cls, n, total=1.0):
        return cls(np.full(n, total / n))

    def __len__(self):
        return self.weights.size

    @property
    def total(self):
        return float(self.weights.sum())

    def subspace(self, atoms):
        atoms = np.asarray(atoms, dtype=int)
        return AtomicMeasureSpace(self.weights[atoms], [self.ids[i] for i in atoms])

    def lp_norm(self, g, p):
        g = np.abs(np.asarray(g, dtype=float))
        if np.isinf(p):
            return float(g.max())
        return float(np.sum(g ** p * self.weights)) ** (1.0 / p)

    def to_dict(self):
        return {"ids": list(self.ids), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["weights"], d.get("ids"))


def _weights(space):
    return space.weights if isinstance(space, AtomicMeasureSpace) else np.asarray(space, dtype=float)


def _check_exponents(p, q):
    if not (0 < p < np.inf):
        raise DomainError(f"p must lie in (0, inf), got {p}")
    if not q > 0:
        raise DomainError(f"q must lie in (0, inf], got {q}")


def lorentz_norm_rows(G, weights, p, q):
    """Lorentz quasinorm of every row of ``G`` (shape ``(L, atoms)``)."""
    _check_exponents(p, q)
    G = np.abs(np.atleast_2d(np.asarray(G, dtype=float)))
    w = np.asarray(weights, dtype=float)
    order = np.argsort(-G, axis=1, kind="stable")
    v = np.take_along_axis(G, order, axis=1)
    W = np.cumsum(w[order], axis=1)
    if np.isinf(q):
        return (v * W ** (1.0 / p)).max(axis=1)
    Wprev = W - w[order]
    e = q / p
    mass = (W ** e - Wprev ** e) / e
    return np.sum(v ** q * mass, axis=1) ** (1.0 / q)


def lorentz_norm(g, space, p, q):
    """Lorentz quasinorm of a real function on the atoms of ``space``."""
    return float(lorentz_norm_rows(np.asarray(g, dtype=float)[None, :], _weights(space), p, q)[0])


def weak_norm_levels(g, space, p):
    """``sup_lam lam * m(|g| > lam)^(1/p)`` from the distribution function.

    Evaluated at the distinct values of |g| (just below each level the
    superlevel set is ``{|g| >= level}``); independent of the rearrangement
    formula in ``lorentz_norm``.
    """
    g = np.abs(np.asarray(g, dtype=float))
    w = _weights(space)
    best = 0.0
    for level in np.unique(g[g > 0]):
        best = max(best, level * float(w[g >= level].sum()) ** (1.0 / p))
    return best


class JumpProfile:
    """Per-atom breakpoints ``b`` (ascending) and the jump count at each.

    For an atom with breakpoints ``b_1 < ... < b_k`` and counts
    ``c_1 >= ... >= c_k``, ``N_lam = c_i`` on ``(b_{i-1}, b_i]`` and 0 above
    ``b_k``.  Profiles built from jump levels also keep the dense
    ``(atoms, k)`` level matrix, with ``N_lam(x) = #{k : levels[x, k] >= lam}``.
    """

    def __init__(self, breakpoints=None, counts=None, levels=None):
        if levels is None and (breakpoints is None or counts is None):
            raise InputError("need breakpoints and counts, or levels")
        self.levels = None if levels is None else np.asarray(levels, dtype=float)
        if breakpoints is not None:
            self.breakpoints = [np.asarray(b, dtype=float) for b in breakpoints]
            self.counts = [np.asarray(c, dtype=np.int64) for c in counts]

    @classmethod
    def from_levels(cls, levels):
        return cls(levels=levels)

    def _unpack_levels(self):
        bs, cs = [], []
        for row in self.levels:
            b, c = _levels_to_profile(row[row > 0])
            bs.append(b)
            cs.append(c)
        self.breakpoints, self.counts = bs, cs

    @cached_property
    def breakpoints(self):
        self._unpack_levels()
        return self.__dict__["breakpoints"]

    @cached_property
    def counts(self):
        self._unpack_levels()
        return self.__dict__["counts"]

    def __len__(self):
        if self.levels is not None:
            return self.levels.shape[0]
        return len(self.breakpoints)

    @cached_property
    def global_breakpoints(self):
        if self.levels is not None:
            return np.unique(self.levels[self.levels > 0])
        nonempty = [b for b in self.breakpoints if b.size]
        if not nonempty:
            return np.zeros(0)
        return np.unique(np.concatenate(nonempty))

    def counts_at(self, lams):
        """Matrix of N_lam for every atom, shape ``(len(lams), atoms)``."""
        lams = np.asarray(lams, dtype=float)
        out = np.zeros((lams.size, len(self)), dtype=np.int64)
        for a, (b, c) in enumerate(zip(self.breakpoints, self.counts)):
            if b.size == 0:
                continue
            idx = np.searchsorted(b, lams, side="left")
            inside = idx < b.size
            out[inside, a] = c[idx[inside]]
        return out

    def is_monotone(self):
        return all(np.all(np.diff(c) <= 0) for c in self.counts)


def _levels_to_profile(levels):
    # levels are nonincreasing; N_lam = #{k : levels[k] >= lam}
    b = np.unique(levels)
    return b, levels.size - np.searchsorted(levels[::-1], b, side="left")


@dataclass(eq=False)
class SampledProcess:
    """One time series per atom, all on the same index set and norm."""

    space: AtomicMeasureSpace
    values: np.ndarray
    labels: np.ndarray = None
    bnorm: BNorm = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3:
            raise InputError(f"values must have shape (atoms, times, m), got {v.shape}")
        if v.shape[0] != len(self.space):
            raise InputError("need one series per atom")
        if v.shape[1] == 0:
            raise DomainError("index set must be nonempty")
        if not np.all(np.isfinite(v)):
            raise InputError("values must be finite")
        self.values = v
        if self.bnorm is None:
            self.bnorm = BNorm(m=v.shape[2])
        elif self.bnorm.m != v.shape[2]:
            raise InputError("value dimension does not match the norm")
        if self.labels is None:
            self.labels = np.arange(v.shape[1])
        self.labels = np.asarray(self.labels)
        if self.labels.shape != (v.shape[1],):
            raise InputError("need exactly one label per time")
        if v.shape[1] > 1 and not np.all(self.labels[1:] > self.labels[:-1]):
            raise InputError("labels must be strictly increasing")

    @classmethod
    def scalar(cls, space, rows, labels=None):
        return cls(space, np.asarray(rows, dtype=float)[:, :, None], labels)

    @property
    def n_atoms(self):
        return self.values.shape[0]

    @property
    def n_times(self):
        return self.values.shape[1]

    def series(self, atom):
        return TimeSeries(self.values[atom], self.labels, self.bnorm)

    @cached_property
    def distances(self):
        v = self.values
        return self.bnorm(v[:, None, :, :] - v[:, :, None, :])

    @cached_property
    def profile(self):
        return JumpProfile.from_levels(kernels.jump_levels_many(np.ascontiguousarray(self.distances)))

    def variations(self, r):
        """Per-atom r-variation."""
        if np.isinf(r):
            return self.distances.max(axis=(1, 2))
        if self.n_times == 1:
            return np.zeros(self.n_atoms)
        return np.array([kernels.variation_dp(np.ascontiguousarray(D), float(r))[0]
                         for D in self.distances]) ** (1.0 / r)

    def with_values(self, values):
        return SampledProcess(self.space, values, self.labels, self.bnorm)

    def restricted(self, atoms):
        atoms = np.asarray(atoms, dtype=int)
        return SampledProcess(self.space.subspace(atoms), self.values[atoms], self.labels, self.bnorm)

    def anchored(self):
        """Representative modulo per-atom constants with ``f(x, min I) = 0``."""
        return self.with_values(self.values - self.values[:, :1, :])

    def to_dict(self):
        return {
            "space": self.space.to_dict(),
            "labels": self.labels.tolist(),
            "values": {str(i): self.values[a].tolist() for a, i in enumerate(self.space.ids)},
            "norm": self.bnorm.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        space = AtomicMeasureSpace.from_dict(d["space"])
        vals = d["values"]
        if isinstance(vals, dict):
            vals = [vals[str(i)] for i in space.ids]
        bnorm = BNorm.from_dict(d["norm"]) if "norm" in d else None
        arr = np.asarray(vals, dtype=float)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        return cls(space, arr, d.get("labels"), bnorm)


@dataclass(eq=False)
class NonnegProcess:
    """``F : X x {0..K-1} -> [0, inf)``."""

    space: AtomicMeasureSpace
    values: np.ndarray

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.shape[0] != len(self.space):
            raise InputError("need one row per atom")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise InputError("entries must be finite and nonnegative")

    @cached_property
    def profile(self):
        bs, cs = [], []
        for row in self.values:
            b = np.unique(row[row > 0])
            srt = np.sort(row)
            cs.append(row.size - np.searchsorted(srt, b, side="left"))
            bs.append(b)
        return JumpProfile(bs, cs)

    def lr_norms(self, r):
        if np.isinf(r):
            return self.values.max(axis=1, initial=0.0)
        return np.sum(self.values ** r, axis=1) ** (1.0 / r)


class JumpSeminorm(NamedTuple):
    value: float
    argmax_lambda: float  # None when every series is constant


def _levels_event_sup(L, weights, p, rho):
    # each positive entry L[x, k] raises N at lam <= L[x, k] from k to k+1
    a = p / rho
    k = np.broadcast_to(np.arange(L.shape[1]), L.shape)
    inc = weights[:, None] * ((k + 1.0) ** a - k ** a)
    pos = L > 0
    v, inc = L[pos], inc[pos]
    order = np.argsort(-v, kind="stable")
    v, mass = v[order], np.cumsum(inc[order])
    last = np.append(v[1:] != v[:-1], True)  # end of each tie group
    vals = v[last] * mass[last] ** (1.0 / p)
    j = int(np.argmax(vals))
    return JumpSeminorm(float(vals[j]), float(v[last][j]))


def _levels_weak_sup(L, weights, p, rho):
    best, arg = 0.0, None
    for k in range(L.shape[1]):
        col = L[:, k]
        if not np.any(col > 0):
            break
        order = np.argsort(-col, kind="stable")
        v = col[order]
        cand = v * np.cumsum(weights[order]) ** (1.0 / p) * (k + 1.0) ** (1.0 / rho)
        j = int(np.argmax(cand))
        if cand[j] > best:
            best, arg = float(cand[j]), float(v[j])
    return JumpSeminorm(best, arg)


def _profile_sup(profile, weights, p, q, rho, chunk=2048):
    L = profile.levels
    if L is not None and (q == p or np.isinf(q)):
        if not np.any(L > 0):
            return JumpSeminorm(0.0, None)
        if q == p:
            return _levels_event_sup(L, np.asarray(weights, dtype=float), p, rho)
        return _levels_weak_sup(L, np.asarray(weights, dtype=float), p, rho)
    lams = profile.global_breakpoints
    if lams.size == 0:
        return JumpSeminorm(0.0, None)
    if q == p:
        # piecewise-constant sum of w * N^(p/rho) assembled from per-atom events
        a = p / rho
        ev_b, ev_dec = [], []
        start = 0.0
        for w, b, c in zip(weights, profile.breakpoints, profile.counts):
            if b.size == 0:
                continue
            levels = c.astype(float) ** a
            start += w * levels[0]
            ev_b.append(b)
            ev_dec.append(w * (levels - np.append(levels[1:], 0.0)))
        ev_b = np.concatenate(ev_b)
        ev_dec = np.concatenate(ev_dec)
        order = np.argsort(ev_b, kind="stable")
        ev_b, cum = ev_b[order], np.concatenate([[0.0], np.cumsum(ev_dec[order])])
        below = np.searchsorted(ev_b, lams, side="left")
        mass = np.maximum(start - cum[below], 0.0)
        vals = lams * mass ** (1.0 / p)
    elif np.isinf(q):
        return _weak_profile_sup(profile, weights, p, rho)
    else:
        vals = np.empty(lams.size)
        for lo in range(0, lams.size, chunk):
            part = lams[lo:lo + chunk]
            N = profile.counts_at(part).astype(float)
            vals[lo:lo + chunk] = lorentz_norm_rows(part[:, None] * N ** (1.0 / rho), weights, p, q)
    k = int(np.argmax(vals))
    if vals[k] == 0.0:
        return JumpSeminorm(0.0, None)
    return JumpSeminorm(float(vals[k]), float(lams[k]))


def _weak_profile_sup(profile, weights, p, rho):
    # {N_lam >= k} = {lam_k >= lam} with lam_k(x) the largest breakpoint at
    # which the count is still >= k, so the sup over lam of the weak norm is
    # max_k k^(1/rho) ||lam_k||_{p,inf}
    kmax = max((int(c[0]) for c in profile.counts if c.size), default=0)
    best, arg = 0.0, None
    for k in range(1, kmax + 1):
        lam_k = np.zeros(len(weights))
        for a, (b, c) in enumerate(zip(profile.breakpoints, profile.counts)):
            i = np.searchsorted(-c, -k, side="right") - 1
            if i >= 0:
                lam_k[a] = b[i]
        order = np.argsort(-lam_k, kind="stable")
        v = lam_k[order]
        cand = v * np.cumsum(weights[order]) ** (1.0 / p) * k ** (1.0 / rho)
        j = int(np.argmax(cand))
        if cand[j] > best:
            best, arg = float(cand[j]), float(v[j])
    return JumpSeminorm(best, arg)


def jump_seminorm(f, p, q, rho):
    """``sup_lam || lam N_lam^(1/rho) ||_{L^{p,q}(X)}``, exact.

    Every ``N_lam(x)`` is constant on the intervals between consecutive global
    breakpoints (left-open, right-closed), so the supremum of ``lam * const``
    over each interval is attained at its right end.
    """
    _check_exponents(p, q)
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    return _profile_sup(f.profile, f.space.weights, p, q, rho)


def difference_jump_seminorm(F, p, q, rho):
    """Same supremum for ``N_lam(x) = #{n : F(x, n) >= lam}``."""
    _check_exponents(p, q)
    return _profile_sup(F.profile, F.space.weights, p, q, rho)


def variation_lorentz_norm(f, r, p, q):
    """``|| V^r(f(x, .)) ||_{L^{p,q}(X)}``."""
    return lorentz_norm(f.variations(r), f.space, p, q)


def difference_process(f, r):
    """Consecutive jump sizes along each atom's optimal r-variation sequence.

    Zero-padded to ``n - 1`` entries, so ``||F(x,.)||_{l^r} = V^r(f(x,.))``.
    """
    n = f.n_times
    F = np.zeros((f.n_atoms, max(n - 1, 1)))
    for a in range(f.n_atoms):
        ts = f.series(a)
        times = variation(ts, r).times
        idx = np.searchsorted(f.labels, times)
        if len(idx) > 1:
            F[a, : len(idx) - 1] = ts.distances[idx[:-1], idx[1:]]
    return NonnegProcess(f.space, F)


def check_l1inf_logconvex(gs, a, space):
    """``||sum g_j||_{1,inf} <= 2 sum_j a_j (log(sum a / a_j) + 2)``.

    Precondition ``||g_j||_{1,inf} <= a_j`` is verified; a violation raises
    ``InputError`` whose ``item`` is the offending index.
    """
    a = np.asarray(a, dtype=float)
    if len(gs) != a.size or np.any(a <= 0):
        raise InputError("need one positive bound per function")
    norms = [lorentz_norm(g, space, 1.0, np.inf) for g in gs]
    for j, (nj, aj) in enumerate(zip(norms, a)):
        if nj > aj * (1 + 1e-12):
            raise InputError(f"||g_{j}||_(1,inf) = {nj} exceeds a_{j} = {aj}", item=j)
    lhs = lorentz_norm(np.sum(gs, axis=0), space, 1.0, np.inf)
    total = a.sum()
    rhs = 2.0 * float(np.sum(a * (np.log(total / a) + 2.0)))
    return Check("l1inf-logconvex", lhs, rhs, lhs <= rhs,
                 params={"a": a.tolist()}, witness={"norms": norms})


def check_lpinf_pconvex(gs, p, space):
    """``||sum g_j||_{p,inf}^p <= (1 + 2/(1-p)) sum_j ||g_j||_{p,inf}^p`` for 0<p<1."""
    if not 0 < p < 1:
        raise DomainError(f"p-convexity is stated for 0 < p < 1, got {p}")
    gs = [np.asarray(g, dtype=float) for g in gs]
    for j, g in enumerate(gs):
        if np.any(g < 0):
            raise InputError(f"g_{j} takes negative values", item=j)
    lhs = lorentz_norm(np.sum(gs, axis=0), space, p, np.inf) ** p
    rhs = float(sum(lorentz_norm(g, space, p, np.inf) ** p for g in gs))
    const = 1.0 + 2.0 / (1.0 - p)
    return Check("lpinf-pconvex", lhs, rhs, lhs <= const * rhs * (1 + 1e-12),
                 params={"p": p, "C_p": const})


def _variation_bound_cases(p, rho, r):
    ratio = 1.0 if np.isinf(r) else r / (r - rho)
    if p < rho:
        return [("p<rho", ratio ** (1.0 / p), np.inf)]
    if p > rho:
        return [("p>rho", ratio ** (1.0 / rho), np.inf)]
    return [
        ("p=rho,weak", (ratio * (1.0 + math.log(ratio))) ** (1.0 / rho), np.inf),
        ("p=rho,strong", ratio ** (1.0 / rho), p),
    ]


def variation_from_jumps_report(f, p, rho, r):
    """Weak-type r-variation against the jump seminorm, for r > rho.

    ``f`` is a ``SampledProcess`` (variation / jump counts along I) or a
    ``NonnegProcess`` (l^r norms / superlevel counts).  For each applicable
    case the record holds the coefficient and the implied constant
    ``lhs / (coefficient * jump seminorm)``; ``rhs`` is the weak-type
    (q = inf) jump seminorm and ``ratio`` the raw quotient.
    """
    if not r > rho:
        raise DomainError("the estimate holds for r > rho only")
    if not (0 < p):
        raise DomainError("p must be positive")
    if isinstance(f, NonnegProcess):
        lhs = lorentz_norm(f.lr_norms(r), f.space, p, np.inf)
        seminorm = lambda qq: difference_jump_seminorm(f, p, qq, rho).value
    else:
        lhs = lorentz_norm(f.variations(r), f.space, p, np.inf)
        seminorm = lambda qq: jump_seminorm(f, p, qq, rho).value
    cases = []
    for name, coeff, qq in _variation_bound_cases(p, rho, r):
        J = seminorm(qq)
        const = safe_ratio(lhs, coeff * J)
        cases.append({"case": name, "coefficient": coeff, "jump_seminorm": J,
                      "q": qq, "implied_constant": const})
    rhs = seminorm(np.inf)
    best = min(c["implied_constant"] for c in cases)
    return Check("variation-from-jumps", lhs, rhs, math.isfinite(best),
                 params={"p": p, "rho": rho, "r": r},
                 witness={"cases": cases, "implied_constant": best})
