"""Finite martingales on atomic probability spaces.

A filtration is a refining sequence of partitions of the atoms, stored as
integer block labels per atom.  Conditional expectations are weighted block
means, so every identity here is a finite sum.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .core import BNorm
from .errors import DomainError, InputError
from .interpolation import CoupleElement, VariationCouple, interp_norm
from .lorentz import AtomicMeasureSpace, SampledProcess, jump_seminorm
from .report import Check, safe_ratio

__all__ = [
    "Filtration",
    "FiniteMartingale",
    "StoppedMartingale",
    "LepingleSplit",
    "conditional_expectation",
    "make_martingale",
    "square_function",
    "doob_max",
    "doob_check",
    "lepingle_split",
    "verify_lepingle",
    "dyadic_walk",
    "random_refinement",
    "hill_climb",
]


def _labels(partition, n):
    """Block labels from a label array or a list of atom-index blocks."""
    if isinstance(partition, np.ndarray) and partition.ndim == 1 and partition.dtype.kind in "iu":
        if partition.size != n:
            raise InputError("need one block label per atom")
        return np.unique(partition, return_inverse=True)[1].astype(np.int64)
    labels = np.full(n, -1, dtype=np.int64)
    for b, block in enumerate(partition):
        block = np.asarray(block, dtype=np.int64)
        if block.size == 0:
            raise InputError("partition blocks must be nonempty")
        if np.any(labels[block] >= 0):
            raise InputError("partition blocks overlap", item=b)
        labels[block] = b
    if np.any(labels < 0):
        raise InputError("partition does not cover every atom")
    return labels


def conditional_expectation(values, partition, weights):
    """Weighted block means, constant on each block."""
    weights = np.asarray(weights, dtype=float)
    v = np.asarray(values, dtype=float)
    labels = _labels(partition, weights.size)
    flat = v.reshape(weights.size, -1)
    mass = np.bincount(labels, weights=weights)
    sums = np.stack([np.bincount(labels, weights=weights * flat[:, c], minlength=mass.size)
                     for c in range(flat.shape[1])], axis=1)
    return (sums / mass[:, None])[labels].reshape(v.shape)


@dataclass(eq=False)
class Filtration:
    space: AtomicMeasureSpace
    labels: np.ndarray  # (T, atoms)

    def __post_init__(self):
        n = len(self.space)
        self.labels = np.stack([_labels(p, n) for p in self.labels])
        for t in range(1, self.labels.shape[0]):
            fine, coarse = self.labels[t], self.labels[t - 1]
            # each fine block must sit inside one coarse block
            pairs = np.unique(np.stack([fine, coarse]), axis=1)
            if np.unique(pairs[0]).size != pairs.shape[1]:
                raise InputError(f"partition {t} does not refine partition {t - 1}", item=t)

    @classmethod
    def from_blocks(cls, space, partitions):
        return cls(space, [_labels(p, len(space)) for p in partitions])

    def __len__(self):
        return self.labels.shape[0]

    def blocks(self, t):
        return [np.flatnonzero(self.labels[t] == b) for b in range(self.labels[t].max() + 1)]

    def expect(self, values, t):
        return conditional_expectation(values, self.labels[t], self.space.weights)

    def measurable(self, values, t, tol=0.0):
        v = np.asarray(values, dtype=float).reshape(len(self.space), -1)
        return bool(np.all(np.abs(v - conditional_expectation(v, self.labels[t], self.space.weights))
                           <= tol * max(1.0, float(np.abs(v).max(initial=0.0)))))

    def is_stopping_time(self, tau):
        """``{tau <= t}`` is a union of time-``t`` blocks for every ``t``."""
        tau = np.asarray(tau)
        for t in range(len(self)):
            ind = (tau <= t).astype(float)
            if not self.measurable(ind, t):
                return False
        return True

    def to_dict(self):
        return {
            "ids": list(self.space.ids),
            "weights": self.space.weights.tolist(),
            "partitions": [[blk.tolist() for blk in self.blocks(t)] for t in range(len(self))],
        }


@dataclass(eq=False)
class FiniteMartingale:
    filtration: Filtration
    values: np.ndarray  # (T, atoms, m)
    bnorm: BNorm = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 2:
            v = v[:, :, None]
        T, n = len(self.filtration), len(self.filtration.space)
        if v.shape[:2] != (T, n):
            raise InputError(f"values must have shape ({T}, {n}, m), got {v.shape}")
        self.values = v
        if self.bnorm is None:
            self.bnorm = BNorm(m=v.shape[2])

    @property
    def space(self):
        return self.filtration.space

    @property
    def weights(self):
        return self.filtration.space.weights

    def __len__(self):
        return self.values.shape[0]

    def martingale_defect(self):
        """``max_t |f_{t-1} - E[f_t | G_{t-1}]|`` and adaptedness defect."""
        worst = 0.0
        for t in range(len(self)):
            worst = max(worst, float(np.abs(self.values[t] - self.filtration.expect(self.values[t], t)).max()))
            if t:
                back = self.filtration.expect(self.values[t], t - 1)
                worst = max(worst, float(np.abs(self.values[t - 1] - back).max()))
        return worst

    def is_martingale(self, tol=1e-12):
        scale = max(1.0, float(np.abs(self.values).max(initial=0.0)))
        return self.martingale_defect() <= tol * scale

    def norms(self):
        """``||f_t(x)||_B`` as a ``(T, atoms)`` array."""
        return self.bnorm(self.values)

    def lp_norms(self, p):
        nv = self.norms()
        if np.isinf(p):
            return nv.max(axis=1)
        return np.sum(self.weights * nv ** p, axis=1) ** (1.0 / p)

    @cached_property
    def process(self):
        return SampledProcess(self.space, np.transpose(self.values, (1, 0, 2)), bnorm=self.bnorm)

    def scaled(self, c):
        return FiniteMartingale(self.filtration, c * self.values, self.bnorm)

    def to_dict(self):
        d = self.filtration.to_dict()
        d["values"] = self.values.tolist()
        d["norm"] = self.bnorm.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        space = AtomicMeasureSpace(d["weights"], d.get("ids"))
        ids = {str(i): k for k, i in enumerate(space.ids)}
        parts = [[[ids[str(a)] if str(a) in ids else int(a) for a in blk] for blk in part]
                 for part in d["partitions"]]
        filt = Filtration.from_blocks(space, parts)
        bnorm = BNorm.from_dict(d["norm"]) if "norm" in d else None
        return cls(filt, d["values"], bnorm)


def make_martingale(filtration, terminal, bnorm=None):
    """``f_t = E[terminal | G_t]``."""
    terminal = np.asarray(terminal, dtype=float)
    if terminal.ndim == 1:
        terminal = terminal[:, None]
    vals = np.stack([filtration.expect(terminal, t) for t in range(len(filtration))])
    return FiniteMartingale(filtration, vals, bnorm)


def square_function(m, rho):
    """``(sum_{n>0} ||f_n - f_{n-1}||^rho)^(1/rho)`` per atom."""
    d = m.bnorm(np.diff(m.values, axis=0))
    if d.shape[0] == 0:
        return np.zeros(m.values.shape[1])
    if np.isinf(rho):
        return d.max(axis=0)
    return np.sum(d ** rho, axis=0) ** (1.0 / rho)


def doob_max(m):
    """``f_*(x) = max_t ||f_t(x)||``."""
    return m.norms().max(axis=0)


def doob_check(m, p):
    """``||f_*||_p <= p' sup_t ||f_t||_p``."""
    if not p > 1:
        raise DomainError("the maximal inequality needs p > 1")
    lhs = m.space.lp_norm(doob_max(m), p)
    pp = 1.0 if np.isinf(p) else p / (p - 1.0)
    rhs = pp * float(m.lp_norms(p).max())
    return Check("doob", lhs, rhs, lhs <= rhs * (1 + 1e-12), params={"p": p, "p_conjugate": pp})


# ------------------------------------------------------------ stopping split


@dataclass(eq=False)
class StoppedMartingale:
    """Values along the lambda-jump stopping times of a martingale.

    ``tau[k, x]`` is ``t_k(x)`` with ``-1`` for ``+inf``.  ``frozen`` keeps the
    value at the last finite stopping time once the times run out;
    ``sampled`` uses ``f_{t_k ^ max I}``, which is a martingale for the
    stopped filtration ``G_{t_k ^ max I}``.
    """

    base: FiniteMartingale
    tau: np.ndarray
    frozen: np.ndarray  # (K, atoms, m)
    sampled: np.ndarray

    def capped(self, k):
        last = len(self.base) - 1
        return np.where(self.tau[k] < 0, last, self.tau[k])

    def stopped_labels(self, k):
        """Partition of ``G_{t_k ^ max I}``: same capped time, same block then."""
        tk = self.capped(k)
        blocks = self.base.filtration.labels[tk, np.arange(tk.size)]
        _, lab = np.unique(np.stack([tk, blocks]), axis=1, return_inverse=True)
        return lab.ravel()

    def _defect(self, vals):
        w = self.base.weights
        worst = 0.0
        for k in range(1, vals.shape[0]):
            back = conditional_expectation(vals[k], self.stopped_labels(k - 1), w)
            worst = max(worst, float(np.abs(back - vals[k - 1]).max()))
        return worst

    def is_martingale(self, which="sampled", tol=1e-12):
        vals = self.sampled if which == "sampled" else self.frozen
        scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
        return self._defect(vals) <= tol * scale

    def square_function(self, rho, which="frozen"):
        vals = self.sampled if which == "sampled" else self.frozen
        d = self.base.bnorm(np.diff(vals, axis=0))
        if d.shape[0] == 0:
            return np.zeros(vals.shape[1])
        return np.sum(d ** rho, axis=0) ** (1.0 / rho)


@dataclass(eq=False)
class LepingleSplit:
    f0: np.ndarray
    f1: np.ndarray
    stopped: StoppedMartingale
    cert: dict = field(default_factory=dict)


def lepingle_split(m, lam, rho, tol=1e-12, extras=True):
    """Split along the lambda-jump stopping times and certify both parts.

    ``f1_t(x) = f_{t_k(x)}(x)`` for ``t_k(x) <= t < t_{k+1}(x)``.  Certificates
    are checked pointwise with relative tolerance ``tol``:
    (i) ``||f0_t(x)|| <= lam``;  (ii) ``V^1(f1(x, .)) <= lam^(1-rho) S_rho(frozen)(x)^rho``.
    ``extras`` adds the stopping-time and martingale-property checks.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    proc = m.process
    T, n = len(m), proc.n_atoms
    times = [kernels.greedy_jumps(np.ascontiguousarray(D), float(lam))[1] for D in proc.distances]
    K = max(len(t) for t in times)
    tau = np.full((K, n), -1, dtype=np.int64)
    for x, idx in enumerate(times):
        tau[: len(idx), x] = idx
    last_finite = np.array([idx[-1] for idx in times])
    frozen_t = np.where(tau < 0, last_finite[None, :], tau)
    sampled_t = np.where(tau < 0, T - 1, tau)
    atoms = np.arange(n)
    frozen = m.values[frozen_t, atoms[None, :]]
    sampled = m.values[sampled_t, atoms[None, :]]
    stopped = StoppedMartingale(m, tau, frozen, sampled)

    last = np.empty((T, n), dtype=np.int64)
    for x, idx in enumerate(times):
        last[:, x] = idx[np.searchsorted(idx, np.arange(T), side="right") - 1]
    f1 = m.values[last, atoms[None, :]]
    f0 = m.values - f1

    size0 = m.bnorm(f0).max(axis=0)
    # V^1 is the sum of consecutive increments (triangle inequality)
    v1 = m.bnorm(np.diff(f1, axis=0)).sum(axis=0)
    bound1 = lam ** (1 - rho) * stopped.square_function(rho, "frozen") ** rho
    scale = max(1.0, float(np.abs(m.values).max(initial=0.0)))
    ok0 = size0 <= lam * (1 + tol)
    ok1 = v1 <= bound1 * (1 + tol) + tol * scale
    cert = {
        "lambda": lam,
        "rho": rho,
        "f0_max": float(size0.max()),
        "f0_ok": bool(ok0.all()),
        "v1": v1,
        "bound": bound1,
        "v1_ok": bool(ok1.all()),
        "slack": float(np.min(bound1 - v1)) if n else 0.0,
    }
    if extras:
        cert["stopping_times_ok"] = all(m.filtration.is_stopping_time(np.where(tau[k] < 0, T, tau[k]))
                                        for k in range(K))
        cert["sampled_is_martingale"] = stopped.is_martingale("sampled")
        cert["frozen_is_martingale"] = stopped.is_martingale("frozen")
    return LepingleSplit(f0, f1, stopped, cert)


def verify_lepingle(m, p, rho, middle=True):
    """Jump seminorm of a martingale against ``sup_t ||f_t||_p``.

    Records the ratio, the interpolation-space middle term, the square
    function constant ``||S_rho f||_p / sup_t ||f_t||_p`` and the weak-type
    ratio with ``L^{1,inf}`` and ``L^1``.  For scalar data at ``p = rho = 2``
    it asserts ``J <= 3 sup_t ||f_t||_2``.
    """
    if not 1 < p < np.inf:
        raise DomainError("p must lie in (1, inf)")
    if not 2 <= rho < np.inf:
        raise DomainError("rho must lie in [2, inf)")
    proc = m.process
    J = jump_seminorm(proc, p, p, rho)
    sup = float(m.lp_norms(p).max())
    witness = {"argmax_lambda": J.argmax_lambda}
    witness["square_constant"] = safe_ratio(m.space.lp_norm(square_function(m, rho), p), sup)
    witness["weak_ratio"] = safe_ratio(jump_seminorm(proc, 1.0, np.inf, rho).value,
                                       float(m.lp_norms(1.0).max()))
    if middle:
        elem = CoupleElement(proc, VariationCouple(1.0, p / rho, p / rho))
        mode = "brute" if m.values.shape[2] == 1 else "constructive"
        witness["middle"] = interp_norm(elem, 1.0 / rho, mode=mode)
        witness["middle_mode"] = mode
    quantitative = m.values.shape[2] == 1 and p == 2 and rho == 2
    holds = J.value <= 3 * sup * (1 + 1e-12) if quantitative else math.isfinite(safe_ratio(J.value, sup))
    return Check("lepingle", J.value, sup, holds,
                 params={"p": p, "rho": rho, "quantitative": quantitative, "constant": 3.0},
                 witness=witness)


# ---------------------------------------------------------------- generators


def dyadic_walk(depth, rng, m=1, steps="sign", scale=1.0, s=2.0):
    """Dyadic filtration on ``2^depth`` equal atoms with symmetric increments.

    At step ``t`` each block splits into two halves moving by ``+d`` and
    ``-d``; ``d`` is ``scale`` times a sign (``steps="sign"``) or a normal
    draw per block (``steps="gauss"``), a vector when ``m > 1``.
    """
    n = 2 ** depth
    space = AtomicMeasureSpace.uniform(n)
    labels = np.stack([np.arange(n) >> (depth - t) for t in range(depth + 1)])
    filt = Filtration(space, labels)
    vals = np.zeros((depth + 1, n, m))
    for t in range(1, depth + 1):
        nb = 2 ** (t - 1)
        if steps == "sign":
            d = scale * rng.choice([-1.0, 1.0], size=(nb, m))
        else:
            d = scale * rng.normal(size=(nb, m))
        child = labels[t]
        sign = np.where(child % 2 == 0, 1.0, -1.0)
        vals[t] = vals[t - 1] + sign[:, None] * d[child >> 1]
    return FiniteMartingale(filt, vals, BNorm(m, s))


def random_refinement(n_atoms, depth, rng, m=1, s=2.0, split_prob=0.5):
    """Random weights, random refining partitions, random terminal data."""
    w = rng.uniform(0.2, 1.0, n_atoms)
    space = AtomicMeasureSpace(w / w.sum())
    labels = [np.zeros(n_atoms, dtype=np.int64)]
    for _ in range(depth):
        cur = labels[-1].copy()
        nxt = cur * 2
        for b in np.unique(cur):
            members = np.flatnonzero(cur == b)
            if members.size > 1 and rng.random() < split_prob:
                side = rng.random(members.size) < 0.5
                if side.all() or not side.any():
                    side[0] = not side[0]
                nxt[members[side]] += 1
        labels.append(nxt)
    labels.append(np.arange(n_atoms))
    filt = Filtration(space, labels)
    return make_martingale(filt, rng.normal(size=(n_atoms, m)), BNorm(m, s))


def hill_climb(m, objective, rng, iters=200, step=0.3):
    """Perturb terminal values to increase ``objective(martingale)``."""
    best = m
    best_v = objective(m)
    term = m.values[-1].copy()
    for _ in range(iters):
        trial = term + step * rng.normal(size=term.shape) * (rng.random(term.shape[0]) < 0.3)[:, None]
        cand = make_martingale(m.filtration, trial, m.bnorm)
        v = objective(cand)
        if v > best_v:
            best, best_v, term = cand, v, trial
    return best, best_v
