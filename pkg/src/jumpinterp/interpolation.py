"""K-functionals and real interpolation norms for finite couples.

Couples
-------
``VariationCouple(s, P, Q)`` is ``(L^inf(X; V^inf), L^{P,Q}(X; V^s))`` on a
``SampledProcess``; ``jump_couple(theta, p, q, rho)`` is the instance with
``s = theta*rho, P = theta*p, Q = theta*q``.  ``TruncationCouple(P, Q)`` is
``(L^inf(X), L^{P,Q}(X))`` on a real function on atoms.  Both are "budget"
couples: the ``L^inf`` endpoint is a uniform budget ``eps`` and

    K(t, f) = min_{eps >= 0}  eps + t * Phi(eps),
    Phi(eps) = || phi_x(eps) ||_{L^{P,Q}(X)},

where ``phi_x(eps)`` is the least cost of the remainder at atom ``x``.  The
Lorentz quasinorm is monotone in the modulus of its argument, so the
minimisation decouples over atoms.  For the variation couple on scalar data
the atom problem is: least ``V^s`` of a path staying within ``eps/2`` of
``f(x, .)``, solved exactly by the lazy path (constant until forced, then
clipping) whenever ``s >= 1``.  ``swapped()`` exchanges the endpoints.

``mode="brute"`` evaluates ``Phi`` on an adaptive budget grid; because
``Phi`` is nonincreasing, ``min_i eps_i + t*Phi(eps_{i+1})`` is a rigorous
lower bound, so the returned value carries a certified relative gap.
``mode="numeric"`` minimises directly over the entries of ``f0`` with
multi-start derivative-free descent.  ``mode="constructive"`` takes the best
of the stopping-time splittings (one per jump breakpoint) and the two
trivial ones.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import kernels
from .errors import ConvergenceError, DomainError, InputError
from .lorentz import (
    AtomicMeasureSpace,
    SampledProcess,
    jump_seminorm,
    lorentz_norm,
    lorentz_norm_rows,
)
from .report import Check, safe_ratio

__all__ = [
    "AtomicFunction",
    "VariationCouple",
    "TruncationCouple",
    "SameNormCouple",
    "jump_couple",
    "CoupleElement",
    "Splitting",
    "KValue",
    "k_functional",
    "k_splitting",
    "stopping_indices",
    "interp_norm",
    "jump_interp_equivalence",
    "forward_chain_check",
    "triangle_check",
    "PsiWeight",
    "atom_k_table",
    "vector_k_sup",
    "water_filling",
    "vector_k_rhs",
    "partition_interp_bound",
    "single_atom_interp",
]


@dataclass(eq=False)
class AtomicFunction:
    """A real function on the atoms of a measure space."""

    space: AtomicMeasureSpace
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != len(self.space):
            raise InputError("need one value per atom")

    def with_values(self, values):
        return AtomicFunction(self.space, values)

    def restricted(self, atoms):
        atoms = np.asarray(atoms, dtype=int)
        return AtomicFunction(self.space.subspace(atoms), self.values[atoms])


# --------------------------------------------------------------------- couples


class _BudgetCouple:
    """Shared logic for couples with a uniform-budget endpoint."""

    reverse = False

    def _orient(self, budget_part, other_part):
        return (other_part, budget_part) if self.reverse else (budget_part, other_part)

    def norm0(self, a):
        return self.other_norm(a) if self.reverse else self.budget_norm(a)

    def norm1(self, a):
        return self.budget_norm(a) if self.reverse else self.other_norm(a)

    def split(self, a, eps):
        """``(f0, f1)`` in this couple's orientation for budget ``eps``."""
        return self._orient(*self.budget_split(a, eps))

    def Phi(self, a, eps):
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        return lorentz_norm_rows(self.phi(a, eps), a.space.weights, self.P, self.Q)


@dataclass(frozen=True)
class VariationCouple(_BudgetCouple):
    """``(L^inf(X;V^inf), L^{P,Q}(X;V^s))`` (or its swap)."""

    s: float
    P: float
    Q: float
    reverse: bool = False

    def __post_init__(self):
        if not (self.s > 0 and self.P > 0 and self.Q > 0):
            raise DomainError("couple exponents must be positive")

    @property
    def exact(self):
        """Whether the per-atom tube problem is solved exactly."""
        return self.s >= 1

    def swapped(self):
        return VariationCouple(self.s, self.P, self.Q, not self.reverse)

    def budget_norm(self, f):
        return float(f.variations(np.inf).max())

    def other_norm(self, f):
        return lorentz_norm(f.variations(self.s), f.space, self.P, self.Q)

    def cap(self, f):
        return self.budget_norm(f)

    def seeds(self, f):
        d = f.distances
        return np.unique(d[d > 0])

    def phi(self, f, eps):
        self._need_scalar(f)
        out = np.empty((eps.size, f.n_atoms))
        for a in range(f.n_atoms):
            out[:, a] = kernels.tube_variation(np.ascontiguousarray(f.values[a, :, 0]), eps, float(self.s))
        return out

    def budget_split(self, f, eps):
        self._need_scalar(f)
        g = np.stack([kernels.lazy_path(f.values[a, :, 0], eps) for a in range(f.n_atoms)])
        rem = f.with_values(g[:, :, None])
        return f.with_values(f.values - rem.values), rem

    @staticmethod
    def _need_scalar(f):
        if f.values.shape[2] != 1:
            raise DomainError("the exact budget reduction needs scalar values; use mode='numeric'")

    def to_dict(self):
        return {"kind": "variation", "s": self.s, "P": self.P, "Q": self.Q, "reverse": self.reverse}


def jump_couple(theta, p, q, rho):
    """``(L^inf(X;V^inf), L^{theta p, theta q}(X;V^{theta rho}))``."""
    if not 0 < theta < 1:
        raise DomainError("theta must lie in (0, 1)")
    return VariationCouple(theta * rho, theta * p, theta * q)


@dataclass(frozen=True)
class TruncationCouple(_BudgetCouple):
    """``(L^inf(X), L^{P,Q}(X))`` for real functions on atoms (or its swap)."""

    P: float
    Q: float = None
    reverse: bool = False

    def __post_init__(self):
        if self.Q is None:
            object.__setattr__(self, "Q", self.P)

    exact = True

    def swapped(self):
        return TruncationCouple(self.P, self.Q, not self.reverse)

    def budget_norm(self, g):
        return float(np.abs(g.values).max())

    def other_norm(self, g):
        return lorentz_norm(g.values, g.space, self.P, self.Q)

    def cap(self, g):
        return self.budget_norm(g)

    def seeds(self, g):
        return np.unique(np.abs(g.values))

    def phi(self, g, eps):
        return np.maximum(np.abs(g.values)[None, :] - eps[:, None], 0.0)

    def budget_split(self, g, eps):
        low = np.clip(g.values, -eps, eps)
        return g.with_values(low), g.with_values(g.values - low)

    def to_dict(self):
        return {"kind": "truncation", "P": self.P, "Q": self.Q, "reverse": self.reverse}


@dataclass(frozen=True)
class SameNormCouple:
    """``A_0 = A_1`` with a single norm; ``K(t, a) = min(1, t) ||a||``."""

    norm: object = None

    def _n(self, a):
        if self.norm is not None:
            return float(self.norm(a))
        return float(np.linalg.norm(np.ravel(a)))

    def norm0(self, a):
        return self._n(a)

    norm1 = norm0

    def swapped(self):
        return self

    def to_dict(self):
        return {"kind": "same-norm"}


@dataclass(eq=False)
class CoupleElement:
    payload: object
    couple: object
    _profile: object = field(default=None, repr=False)

    def scaled(self, c):
        p = self.payload
        if isinstance(p, (SampledProcess, AtomicFunction)):
            return CoupleElement(p.with_values(c * p.values), self.couple)
        return CoupleElement(c * np.asarray(p), self.couple)

    def swapped(self):
        return CoupleElement(self.payload, self.couple.swapped())


@dataclass(eq=False)
class Splitting:
    """``payload = f0 + f1`` with ``cert0 = ||f0||_{A_0}``, ``cert1 = ||f1||_{A_1}``."""

    f0: object
    f1: object
    cert0: float
    cert1: float
    info: dict = field(default_factory=dict)

    def cost(self, t):
        # 0 * inf would be nan; an element of A_0 alone costs cert0
        return self.cert0 + (t * self.cert1 if t > 0 else 0.0)

    def verify(self, elem, atol=1e-12):
        """Additivity and certificate recomputation."""
        c = elem.couple
        vals = lambda a: a.values if hasattr(a, "values") else np.asarray(a)
        gap = np.max(np.abs(vals(self.f0) + vals(self.f1) - vals(elem.payload)), initial=0.0)
        scale = max(1.0, float(np.max(np.abs(vals(elem.payload)), initial=0.0)))
        ok_sum = gap <= atol * scale
        ok0 = math.isclose(c.norm0(self.f0), self.cert0, rel_tol=1e-9, abs_tol=1e-12)
        ok1 = math.isclose(c.norm1(self.f1), self.cert1, rel_tol=1e-9, abs_tol=1e-12)
        return bool(ok_sum and ok0 and ok1)


class KValue(tuple):
    """``(value, splitting)`` pair; ``lower`` and ``certified`` as attributes."""

    def __new__(cls, value, splitting, lower=None, certified=False):
        obj = super().__new__(cls, (value, splitting))
        obj.lower = value if lower is None else lower
        obj.certified = certified
        return obj

    value = property(lambda self: self[0])
    splitting = property(lambda self: self[1])


# ---------------------------------------------------------------- brute mode


class KProfile:
    """Budget grid and ``Phi`` values of one element, refined on demand."""

    def __init__(self, couple, payload, n_grid=513):
        self.couple = couple
        self.payload = payload
        self.cap = couple.cap(payload)
        if self.cap == 0:
            self.eps = np.zeros(1)
            self.Phi = np.zeros(1)
            return
        grid = np.concatenate([
            np.linspace(0.0, self.cap, n_grid),
            self.cap * np.geomspace(1e-9, 1.0, 64),
            couple.seeds(payload),
        ])
        eps = np.unique(grid[(grid >= 0) & (grid <= self.cap)])
        self.eps = eps
        self.Phi = couple.Phi(payload, eps)

    def _add(self, new):
        new = np.setdiff1d(np.unique(new), self.eps)
        if new.size == 0:
            return False
        vals = self.couple.Phi(self.payload, new)
        eps = np.concatenate([self.eps, new])
        Phi = np.concatenate([self.Phi, vals])
        order = np.argsort(eps, kind="stable")
        self.eps, self.Phi = eps[order], Phi[order]
        return True

    def _weights(self, t):
        # value(eps) = a * eps + b * Phi(eps)
        return (t, 1.0) if self.couple.reverse else (1.0, t)

    def bracket(self, t):
        a, b = self._weights(t)
        vals = a * self.eps + b * self.Phi
        i = int(np.argmin(vals))
        if self.eps.size == 1:
            return float(vals[0]), float(vals[0]), i
        lows = a * self.eps[:-1] + b * self.Phi[1:]
        return float(vals[i]), float(min(lows.min(), vals.min())), i

    def evaluate(self, t, rtol=1e-4, max_rounds=60, per_round=64):
        for _ in range(max_rounds):
            upper, lower, i = self.bracket(t)
            if upper - lower <= rtol * upper or self.eps.size == 1:
                return upper, lower, float(self.eps[i])
            a, b = self._weights(t)
            lows = a * self.eps[:-1] + b * self.Phi[1:]
            cells = np.flatnonzero(lows < upper * (1 - rtol / 2))
            cells = cells[np.argsort(lows[cells])][:per_round]
            left, right = self.eps[cells], self.eps[cells + 1]
            new = (left[:, None] + (right - left)[:, None] * np.linspace(0, 1, 6)[None, 1:-1]).ravel()
            if not self._add(new):
                break
        upper, lower, i = self.bracket(t)
        return upper, lower, float(self.eps[i])


def _profile(elem):
    if elem._profile is None:
        elem._profile = KProfile(elem.couple, elem.payload)
    return elem._profile


def _brute(elem, t, rtol):
    prof = _profile(elem)
    upper, lower, eps = prof.evaluate(t, rtol)
    f0, f1 = elem.couple.split(elem.payload, eps)
    sp = Splitting(f0, f1, elem.couple.norm0(f0), elem.couple.norm1(f1),
                   {"mode": "brute", "budget": eps})
    value = min(sp.cost(t), upper)
    exact = getattr(elem.couple, "exact", True)
    return KValue(value, sp, lower if exact else None, exact and value - lower <= 0.02 * value)


# ------------------------------------------------------------ stopping times


def stopping_indices(f, lam):
    """Per atom, the greedy lambda-jump stopping indices (``t_0 = min I``)."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    return [kernels.greedy_jumps(np.ascontiguousarray(D), float(lam))[1] for D in f.distances]


def k_splitting(f, lam, couple):
    """Stopping-time splitting ``f1(x, t) = f(x, t_{k(x,t)})``, ``f0 = f - f1``.

    Every ``||f0(x, t)||`` is below ``lam``, hence ``cert0 <= 2 lam``; ``f1``
    only changes at stopping times.  ``couple`` fixes the orientation and the
    norm in which ``cert1`` is measured.
    """
    n = f.n_times
    last = np.empty((f.n_atoms, n), dtype=np.int64)
    times = stopping_indices(f, lam)
    for a, idx in enumerate(times):
        last[a] = idx[np.searchsorted(idx, np.arange(n), side="right") - 1]
    v1 = np.take_along_axis(f.values, last[:, :, None], axis=1)
    stop = f.with_values(v1)
    rest = f.with_values(f.values - v1)
    f0, f1 = (stop, rest) if couple.reverse else (rest, stop)
    return Splitting(f0, f1, couple.norm0(f0), couple.norm1(f1),
                     {"mode": "constructive", "lambda": lam, "stopping_indices": times})


def _constructive(elem, t):
    f, c = elem.payload, elem.couple
    if not isinstance(c, VariationCouple):
        raise DomainError(f"no constructive splitting for couple {c.to_dict()}")
    lams = np.unique(f.distances[f.distances > 0])
    cands = [k_splitting(f, lam, c) for lam in lams]
    top = float(lams[-1]) * 2 if lams.size else 1.0
    cands.append(k_splitting(f, top, c))
    zero = f.with_values(np.zeros_like(f.values))
    cands.append(Splitting(zero, f, c.norm0(zero), c.norm1(f), {"mode": "trivial"}))
    cands.append(Splitting(f, zero, c.norm0(f), c.norm1(zero), {"mode": "trivial"}))
    best = min(cands, key=lambda sp: sp.cost(t))
    return KValue(best.cost(t), best)


# ------------------------------------------------------------- numeric mode


def _numeric(elem, t, restarts=5, seed=0):
    f, c = elem.payload, elem.couple
    shape = f.values.shape

    def split(x):
        v0 = x.reshape(shape)
        return f.with_values(v0), f.with_values(f.values - v0)

    def cost(x):
        f0, f1 = split(x)
        return c.norm0(f0) + (t * c.norm1(f1) if t > 0 else 0.0)

    rng = np.random.default_rng(seed)
    starts = [np.zeros(f.values.size), f.values.ravel().copy()]
    if isinstance(c, VariationCouple):
        seed_split = _constructive(elem, t).splitting
        starts.append(np.asarray(seed_split.f0.values).ravel())
    scale = float(np.abs(f.values).max()) or 1.0
    while len(starts) < restarts + 2:
        starts.append(rng.uniform(0, 1, f.values.size) * f.values.ravel()
                      + rng.normal(0, 0.1 * scale, f.values.size))
    best_x, best_v = None, np.inf
    for x0 in starts:
        res = optimize.minimize(cost, x0, method="Powell",
                                options={"xtol": 1e-10, "ftol": 1e-12, "maxfev": 20000})
        res = optimize.minimize(cost, res.x, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-12, "maxfev": 20000,
                                         "adaptive": True})
        if res.fun < best_v:
            best_x, best_v = res.x, float(res.fun)
    f0, f1 = split(best_x)
    sp = Splitting(f0, f1, c.norm0(f0), c.norm1(f1), {"mode": "numeric"})
    return KValue(sp.cost(t), sp)


def k_functional(elem, t, mode="brute", rtol=1e-4):
    """``K(t, a) = inf_{a = a0 + a1} ||a0||_{A_0} + t ||a1||_{A_1}``.

    Returns a ``KValue`` (``value, splitting = ...``); the value is always
    the cost of the returned splitting or of an exactly evaluated budget,
    so it is an upper bound for the infimum.
    """
    if not t >= 0:
        raise DomainError("t must be nonnegative")
    c = elem.couple
    if isinstance(c, SameNormCouple):
        a = np.asarray(elem.payload, dtype=float)
        zero = np.zeros_like(a)
        f0, f1 = (zero, a) if t < 1 else (a, zero)
        return KValue(min(1.0, t) * c.norm0(a), Splitting(f0, f1, c.norm0(f0), c.norm1(f1)),
                      certified=True)
    if mode == "brute":
        return _brute(elem, t, rtol)
    if mode == "constructive":
        return _constructive(elem, t)
    if mode == "numeric":
        return _numeric(elem, t)
    raise DomainError(f"unknown mode {mode!r}")


# ------------------------------------------------------- interpolation norms


def interp_norm(elem, theta, r=np.inf, mode="brute", rtol=1e-9, k_rtol=1e-4, details=False):
    """``[A_0, A_1]_{theta, r}(a)`` from the dyadic samples ``2^{-j theta} K(2^j, a)``.

    ``K(t) <= min(||a||_0, t ||a||_1)`` bounds the terms away from
    ``j* = log2(||a||_0 / ||a||_1)``; the scan stops once the geometric tail of
    that envelope is below ``rtol`` times the current value (for ``r = inf``,
    once the envelope drops below the running maximum, which is exact).
    """
    if not 0 < theta < 1:
        raise DomainError("theta must lie in (0, 1)")
    if not r > 0:
        raise DomainError("r must be positive")
    c = elem.couple
    a0, a1 = c.norm0(elem.payload), c.norm1(elem.payload)
    if a0 == 0 or a1 == 0:
        return (0.0, {}) if details else 0.0
    env = lambda j: min(a0 * 2.0 ** (-j * theta), a1 * 2.0 ** (j * (1 - theta)))
    terms = {}

    def term(j):
        if j not in terms:
            terms[j] = 2.0 ** (-j * theta) * k_functional(elem, 2.0 ** j, mode, k_rtol).value
        return terms[j]

    j0 = int(math.floor(math.log2(a0 / a1)))
    for j in (j0, j0 + 1):
        term(j)

    def done(j, up):
        if np.isinf(r):
            return env(j) <= max(terms.values())
        total = sum(v ** r for v in terms.values())
        if up:
            tail = (a0 * 2.0 ** (-j * theta)) ** r / (1 - 2.0 ** (-theta * r))
        else:
            tail = (a1 * 2.0 ** (j * (1 - theta))) ** r / (1 - 2.0 ** (-(1 - theta) * r))
        return tail <= rtol * total

    j = j0 + 2
    while not done(j, True):
        term(j)
        j += 1
    j = j0 - 1
    while not done(j, False):
        term(j)
        j -= 1
    vals = np.array(list(terms.values()))
    value = float(vals.max()) if np.isinf(r) else float(np.sum(vals ** r)) ** (1.0 / r)
    return (value, dict(sorted(terms.items()))) if details else value


def jump_interp_equivalence(f, p, q, rho, theta, mode="brute"):
    """Both sides of the jump-seminorm / interpolation-norm equivalence."""
    if not (p > 0 and q > 0 and rho > 1 and 0 < theta < 1):
        raise DomainError("need p > 0, q > 0, rho > 1 and theta in (0, 1)")
    J = jump_seminorm(f, p, q, rho)
    elem = CoupleElement(f, jump_couple(theta, p, q, rho))
    I, terms = interp_norm(elem, theta, np.inf, mode=mode, details=True)
    both_zero = I == 0 and J.value == 0
    holds = both_zero or (I > 0 and J.value > 0 and math.isfinite(I))
    j_star = max(terms, key=terms.get) if terms else None
    return Check("jump-interp-equivalence", I, J.value, holds,
                 params={"p": p, "q": q, "rho": rho, "theta": theta, "mode": mode,
                         "couple": elem.couple.to_dict()},
                 witness={"I_over_J": safe_ratio(I, J.value), "J_over_I": safe_ratio(J.value, I),
                          "argmax_lambda": J.argmax_lambda, "argmax_j": j_star})


def forward_chain_check(f, lam, p, q, rho, theta):
    """Jump count of ``f`` at ``lam`` against the stopping part at ``lam / 4``.

    With ``||f0|| < lam/4`` pointwise, ``V^inf(f0) < lam/2`` and every
    ``lam``-jump of ``f`` is a ``lam/2``-jump of ``f1``; combined with the
    jump/variation bound this gives, exactly,
    ``||lam N_lam^(1/rho)||_{p,q} <= 2^theta lam^(1-theta) ||V^(theta rho)(f1)||^theta``.
    """
    couple = jump_couple(theta, p, q, rho)
    sp = k_splitting(f, lam / 4.0, couple)
    f1 = sp.f1
    n_f = np.array([kernels.exact_jumps(np.ascontiguousarray(D), lam)[0] for D in f.distances])
    n_f1 = np.array([kernels.exact_jumps(np.ascontiguousarray(D), lam / 2)[0] for D in f1.distances])
    lhs = lorentz_norm(lam * n_f.astype(float) ** (1.0 / rho), f.space, p, q)
    rhs = 2.0 ** theta * lam ** (1 - theta) * sp.cert1 ** theta
    pointwise = bool(np.all(n_f <= n_f1))
    holds = pointwise and lhs <= rhs * (1 + 1e-12) + 1e-300
    return Check("forward-chain", lhs, rhs, holds, params={"lambda": lam, "p": p, "q": q,
                 "rho": rho, "theta": theta},
                 witness={"cert0": sp.cert0, "cert1": sp.cert1, "counts_dominated": pointwise})


def triangle_check(f, g, p, q, rho):
    """``J(f + g)`` against ``J(f) + J(g)``; ``ratio`` is the implied constant."""
    lhs = jump_seminorm(f.with_values(f.values + g.values), p, q, rho).value
    rhs = jump_seminorm(f, p, q, rho).value + jump_seminorm(g, p, q, rho).value
    return Check("jump-triangle", lhs, rhs, math.isfinite(safe_ratio(lhs, rhs)),
                 params={"p": p, "q": q, "rho": rho})


# --------------------------------------------------- vector-valued K functional


@dataclass(eq=False)
class PsiWeight:
    values: np.ndarray
    rho: float
    t: float

    def check(self, weights, tol=1e-9):
        v = np.asarray(self.values)
        norm = float(np.sum(weights * v ** self.rho)) ** (1 / self.rho)
        return bool(np.all(v > 0) and abs(norm - self.t) <= tol * max(1.0, self.t))


def _lower_hull(x, y):
    # indices of the lower convex hull of points sorted by x
    hull = []
    for i in range(x.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (y[b] - y[a]) * (x[i] - x[a]) >= (y[i] - y[a]) * (x[b] - x[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull)


def atom_k_table(f, s, n_grid=4097):
    """Per-atom ``K(u, f_x; V^s, V^inf)`` as lower envelopes of lines.

    Returns ``(eps, phi)`` of shape ``(vertices, atoms)`` with
    ``K_x(u) = min_i phi[i, x] + u * eps[i, x]``.  Only lower-hull vertices of
    the points ``(eps, phi)`` are kept; the other lines never attain the
    minimum for ``u >= 0``.
    """
    couple = VariationCouple(s, 1.0, 1.0)
    cap = couple.cap(f)
    if cap == 0:
        return np.zeros((1, f.n_atoms)), np.zeros((1, f.n_atoms))
    eps = np.unique(np.concatenate([np.linspace(0, cap, n_grid), couple.seeds(f)]))
    phi = couple.phi(f, eps)
    hulls = [_lower_hull(eps, phi[:, x]) for x in range(f.n_atoms)]
    V = max(h.size for h in hulls)
    E, P = np.empty((V, f.n_atoms)), np.empty((V, f.n_atoms))
    for x, h in enumerate(hulls):
        h = np.concatenate([h, np.full(V - h.size, h[-1])])
        E[:, x], P[:, x] = eps[h], phi[h, x]
    return E, P


def _atom_k(eps, phi, u):
    # u: (..., atoms) -> K values of the same shape
    u = np.asarray(u, dtype=float)
    return np.min(phi[None, :, :] + u.reshape(-1, 1, phi.shape[1]) * eps[None, :, :],
                  axis=1).reshape(u.shape)


def _psi_objective(kfun, w, rho, t):
    def value(u):
        # u on the simplex (rows of a batch), psi = t (u / w)^(1/rho)
        psi = t * (u / w) ** (1.0 / rho)
        return np.sum(w * kfun(psi) ** rho, axis=-1), psi
    return value


def _ascent(value, u0, tol=1e-12, max_iter=2000):
    u = u0 / u0.sum()
    best = float(value(u)[0])
    factors = np.geomspace(1e-3, 1e3, 61)
    step = 1.0
    it = 0
    for it in range(max_iter):
        improved = False
        for x in range(u.size):
            trial = np.repeat(u[None, :], factors.size, axis=0)
            trial[:, x] *= factors ** step
            trial /= trial.sum(axis=1, keepdims=True)
            vals = value(trial)[0]
            k = int(np.argmax(vals))
            if vals[k] > best * (1 + tol):
                best, u = float(vals[k]), trial[k]
                improved = True
        # mass transfers between two atoms leave the others fixed; they reach
        # the corners where some psi(x) sits exactly at a kink
        frac = np.geomspace(1e-9, 1.0, 61) ** step
        for x in range(u.size):
            for y in range(u.size):
                if x == y or u[x] <= 0:
                    continue
                trial = np.repeat(u[None, :], frac.size, axis=0)
                d = frac * u[x]
                trial[:, x] -= d
                trial[:, y] += d
                trial = np.maximum(trial, 1e-300)
                vals = value(trial)[0]
                k = int(np.argmax(vals))
                if vals[k] > best * (1 + tol):
                    best, u = float(vals[k]), trial[k]
                    improved = True
        if not improved:
            if step < 1e-6:
                return u, best, True, it
            step /= 4
    return u, best, False, it


def vector_k_sup(f, t, rho, s=1.0, restarts=4, seed=0, same_norm=False):
    """``sup_{psi > 0, ||psi||_rho = t} sum_x K(psi(x), f(x))^rho m(x)``.

    Per-atom couple ``(V^s, V^inf)`` on a scalar ``SampledProcess``; with
    ``same_norm=True`` the payload is an ``AtomicFunction`` and the per-atom
    couple has one norm, ``K(u, c) = min(1, u) |c|``.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    w = f.space.weights
    if same_norm:
        c = np.abs(f.values)
        kfun = lambda psi: np.minimum(1.0, psi) * c
    else:
        eps, phi = atom_k_table(f, s)
        kfun = lambda psi: _atom_k(eps, phi, psi)
    value = _psi_objective(kfun, w, rho, t)
    rng = np.random.default_rng(seed)
    starts = [w.copy()] + [w * rng.dirichlet(np.ones(w.size)) for _ in range(restarts)]
    best = None
    for u0 in starts:
        u, v, converged, it = _ascent(value, u0)
        if best is None or v > best[1]:
            best = (u, v, converged, it)
    u, v, converged, it = best
    psi = value(u)[1]
    return v, PsiWeight(psi, rho, t), {"converged": converged, "iterations": it}


def water_filling(c, w, rho, t):
    """Closed form of the psi-supremum when ``A_0 = A_1``.

    With ``y = psi^rho`` the objective ``sum w c^rho min(1, y)`` is linear up
    to the cap ``y <= 1`` under ``sum w y = t^rho``: fill atoms in decreasing
    order of ``c`` (fractional knapsack).
    """
    c, w = np.abs(np.asarray(c, dtype=float)), np.asarray(w, dtype=float)
    budget = t ** rho
    total = 0.0
    for x in np.argsort(-c, kind="stable"):
        take = min(1.0, budget / w[x])
        total += w[x] * take * c[x] ** rho
        budget -= take * w[x]
        if budget <= 0:
            break
    return total


def vector_k_rhs(f, t, rho, s=1.0, same_norm=False):
    """``K(t, f; L^rho(X; A_0), L^inf(X; A_1))`` for the same per-atom couple."""
    if same_norm:
        elem = CoupleElement(f, TruncationCouple(rho).swapped())
    else:
        elem = CoupleElement(f, VariationCouple(s, rho, rho).swapped())
    return k_functional(elem, t, "brute", rtol=1e-6)


# ------------------------------------------------------------ partition bound


def _partition_element(f, theta, p, s):
    if isinstance(f, AtomicFunction):
        return CoupleElement(f, TruncationCouple(theta * p))
    return CoupleElement(f, VariationCouple(s, theta * p, theta * p))


def partition_interp_bound(f, parts, theta, p, s=1.0):
    """Global ``[L^inf(X;A_0), L^{theta p}(X;A_1)]_{theta,inf}`` against parts.

    ``f`` is a ``SampledProcess`` (``A_0 = V^inf``, ``A_1 = V^s``) or an
    ``AtomicFunction`` (``A_0 = A_1 = R``).  ``ratio`` is the implied constant
    ``global / (sum_j part_j^p)^(1/p)``.
    """
    if not theta * p >= 1:
        raise DomainError("need theta * p >= 1")
    n = len(f.space)
    flat = sorted(int(a) for part in parts for a in part)
    if flat != list(range(n)) or any(len(part) == 0 for part in parts):
        raise InputError("parts must be nonempty, disjoint and cover every atom")
    glob = interp_norm(_partition_element(f, theta, p, s), theta)
    local = [interp_norm(_partition_element(f.restricted(part), theta, p, s), theta) for part in parts]
    comb = float(np.sum(np.asarray(local) ** p)) ** (1.0 / p)
    return Check("partition-interp", glob, comb, math.isfinite(safe_ratio(glob, comb)),
                 params={"theta": theta, "p": p, "s": s, "parts": [list(map(int, q)) for q in parts]},
                 witness={"parts": local})


def single_atom_interp(c, w, theta, P):
    """Dyadic ``[L^inf, L^P]_{theta,inf}`` of the value ``c`` on one atom of mass ``w``.

    ``K(t) = |c| min(1, t w^(1/P))`` (the budget cost is linear), so the sup
    over ``j`` of ``2^{-j theta} K(2^j)`` sits at one of the two integers
    around ``-log2(w^(1/P))``.
    """
    a = w ** (1.0 / P)
    j = -math.log2(a)
    cands = {math.floor(j), math.ceil(j)}
    return max(2.0 ** (-k * theta) * abs(c) * min(1.0, 2.0 ** k * a) for k in cands)
