"""Doubly stochastic operators on finite state spaces and their orbits."""

import math
from dataclasses import dataclass

import numpy as np

from .core import BNorm
from .errors import ConvergenceError, DomainError, InputError
from .lorentz import AtomicMeasureSpace, SampledProcess, jump_seminorm
from .report import Check, safe_ratio

__all__ = [
    "DoublyStochasticMatrix",
    "random_doubly_stochastic",
    "birkhoff",
    "sinkhorn",
    "semigroup_orbit",
    "verify_markov_jump",
    "contraction_check",
]


@dataclass(eq=False)
class DoublyStochasticMatrix:
    """``Q`` with ``Q 1 = 1`` and ``Q* 1 = 1`` for the state weights.

    The adjoint is taken in ``L^2`` of the weights:
    ``Q*[i, j] = w[j] Q[j, i] / w[i]``.
    """

    matrix: np.ndarray
    weights: np.ndarray = None
    tol: float = 1e-10

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise InputError(f"matrix must be square, got shape {Q.shape}")
        n = Q.shape[0]
        w = np.full(n, 1.0 / n) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (n,) or np.any(w <= 0):
            raise InputError("need one positive weight per state")
        if np.any(Q < 0):
            raise InputError("entries must be nonnegative")
        if np.max(np.abs(Q.sum(axis=1) - 1)) > self.tol:
            raise InputError("rows must sum to 1")
        if np.max(np.abs(w @ Q - w)) > self.tol * max(1.0, float(w.max())):
            raise InputError("Q* 1 = 1 fails: the weights are not invariant")
        self.matrix, self.weights = Q, w

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def adjoint(self):
        w = self.weights
        return self.matrix.T * w[None, :] / w[:, None]

    @property
    def space(self):
        return AtomicMeasureSpace(self.weights)

    def to_dict(self):
        return {"matrix": self.matrix.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["matrix"], d.get("weights"))


def birkhoff(n, rng, k=None):
    """Random convex combination of ``k <= n`` random permutation matrices."""
    if n < 1:
        raise DomainError("n must be positive")
    k = n if k is None else k
    if not 1 <= k <= max(n, 1):
        raise DomainError("number of permutations must lie in [1, n]")
    lam = rng.dirichlet(np.ones(k))
    Q = np.zeros((n, n))
    for c in lam:
        Q[np.arange(n), rng.permutation(n)] += c
    return DoublyStochasticMatrix(Q)


def sinkhorn(n, rng, tol=1e-10, max_iter=10_000):
    """Alternating row/column normalisation of a positive random matrix."""
    if n < 1:
        raise DomainError("n must be positive")
    Q = rng.uniform(0.05, 1.0, (n, n))
    for _ in range(max_iter):
        Q /= Q.sum(axis=1, keepdims=True)
        Q /= Q.sum(axis=0, keepdims=True)
        err = max(np.abs(Q.sum(axis=1) - 1).max(), np.abs(Q.sum(axis=0) - 1).max())
        if err <= tol:
            return DoublyStochasticMatrix(Q, tol=tol)
    raise ConvergenceError(f"sinkhorn did not reach {tol} in {max_iter} iterations (error {err:.3g})")


def random_doubly_stochastic(n, method="birkhoff", seed=None, rng=None, **kw):
    rng = np.random.default_rng(seed) if rng is None else rng
    if method == "birkhoff":
        return birkhoff(n, rng, **kw)
    if method == "sinkhorn":
        return sinkhorn(n, rng, **kw)
    raise DomainError(f"unknown method {method!r}")


def semigroup_orbit(Q, f, N=64, steps=None, bnorm=None):
    """``((Q*)^n Q^n f)_n`` for ``n = 0..N`` (or the listed ``steps``).

    Uses ``M_{n+1} = Q* M_n Q`` with ``M_0 = I``, applied coordinatewise to
    vector-valued ``f``.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] != Q.n:
        raise InputError("f needs one value per state")
    steps = list(range(N + 1)) if steps is None else sorted(set(int(s) for s in steps))
    if not steps or steps[0] < 0:
        raise DomainError("steps must be nonnegative")
    P, Pa = Q.matrix, Q.adjoint
    M = np.eye(Q.n)
    out = []
    want = set(steps)
    for n in range(steps[-1] + 1):
        if n in want:
            out.append(M @ f)
        M = Pa @ M @ P
    vals = np.stack(out, axis=1)
    return SampledProcess(Q.space, vals, labels=np.asarray(steps),
                          bnorm=bnorm or BNorm(m=f.shape[1]))


def _lp(space, g, p):
    return space.lp_norm(g, p)


def verify_markov_jump(Q, f, p=2.0, rho=2.0, N=64, steps=None, bnorm=None):
    """``J^p_rho`` of the orbit against ``||f||_{L^p(X;B)}``."""
    if not 1 < p < np.inf:
        raise DomainError("p must lie in (1, inf)")
    if not 2 <= rho < np.inf:
        raise DomainError("rho must lie in [2, inf)")
    orbit = semigroup_orbit(Q, f, N, steps, bnorm)
    J = jump_seminorm(orbit, p, p, rho)
    rhs = _lp(orbit.space, orbit.bnorm(orbit.values[:, 0, :]), p)
    ratio = safe_ratio(J.value, rhs)
    return Check("markov-jump", J.value, rhs, math.isfinite(ratio),
                 params={"p": p, "rho": rho, "N": N, "n_states": Q.n},
                 witness={"argmax_lambda": J.argmax_lambda})


def contraction_check(Q, f):
    """Positivity and ``||Qf||_p <= ||f||_p`` for ``p`` in ``{1, 2, inf}``."""
    f = np.asarray(f, dtype=float)
    space = Q.space
    out = {}
    for p in (1.0, 2.0, np.inf):
        a, b = _lp(space, Q.matrix @ f, p), _lp(space, f, p)
        out[p] = a <= b * (1 + 1e-12) + 1e-15
    pos = Q.matrix @ np.abs(f)
    out["positive"] = bool(np.all(pos >= -1e-15))
    return out
