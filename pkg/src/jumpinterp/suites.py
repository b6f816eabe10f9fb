"""Named verification suites over seeded random ensembles.

Each suite draws instance ``i`` from its own generator, spawned from the
suite seed with ``SeedSequence``, so instances are reproducible one by one
and can be evaluated in any order or in parallel.  Records are merged by
instance index.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, kernels
from .core import BNorm, TimeSeries, jump_breakpoints, sum_norm_bound, variation
from .errors import DomainError, InputError
from .interpolation import (
    AtomicFunction,
    jump_interp_equivalence,
    partition_interp_bound,
    vector_k_rhs,
    vector_k_sup,
    water_filling,
)
from .lorentz import (
    AtomicMeasureSpace,
    SampledProcess,
    check_l1inf_logconvex,
    check_lpinf_pconvex,
    difference_jump_seminorm,
    difference_process,
    jump_seminorm,
    lorentz_norm,
    variation_from_jumps_report,
)
from .markov import random_doubly_stochastic, verify_markov_jump
from .martingale import (
    FiniteMartingale,
    doob_check,
    dyadic_walk,
    hill_climb,
    lepingle_split,
    random_refinement,
    verify_lepingle,
)
from .oracles import brute_jump_counts, brute_variation
from .report import Report, jsonable, safe_ratio
from .sampling import (
    LatticeSequence,
    check_decimation_identity,
    check_restrict_extend,
    dilated_cutoff,
    verify_jump_transfer,
)

__all__ = ["SuiteConfig", "SUITES", "run_suite", "replay", "write_outputs"]


class UsageError(InputError):
    """Bad suite name or parameters."""


@dataclass
class SuiteConfig:
    suite: str
    params: dict = field(default_factory=dict)
    trials: int = None
    seed: int = 0
    tol: float = None
    out: str = None
    workers: int = 1


@dataclass(frozen=True)
class Suite:
    name: str
    defaults: dict
    make: Callable = None  # (rng, params, index) -> instance
    check: Callable = None  # (instance, params) -> list of record dicts
    load: Callable = None  # dict -> instance
    finish: Callable = None  # (report, params) -> None
    run_all: Callable = None  # (params, seed) -> Report, for suites without instances
    count: Callable = None  # params -> number of instances, default ``trials``

    def size(self, P):
        return P["trials"] if self.count is None else self.count(P)


def _rec(lhs, rhs, holds, ratio=None, **kw):
    return {"lhs": float(lhs), "rhs": float(rhs), "ratio": safe_ratio(lhs, rhs) if ratio is None else ratio,
            "holds": bool(holds), **kw}


def _random_series(rng, n_max, m, s=2.0):
    n = int(rng.integers(1, n_max + 1))
    style = rng.integers(3)
    if style == 0:
        v = rng.normal(size=(n, m))
    elif style == 1:
        v = rng.integers(-2, 3, size=(n, m)).astype(float)  # ties
    else:
        v = np.cumsum(rng.normal(size=(n, m)), axis=0)
    return TimeSeries(v, bnorm=BNorm(m, s))


def _lams(ts):
    b = jump_breakpoints(ts)
    if b.size == 0:
        return np.array([1.0])
    mids = 0.5 * (b[1:] + b[:-1])
    return np.concatenate([b, mids, [b[-1] * 1.5, b[0] / 2]])


# ----------------------------------------------------------------- core-seq


def _series_instance(rng, P, i):
    dims = P["dims"]
    return _random_series(rng, P["n_max"], int(dims[i % len(dims)]))


def _jump_oracle(ts, P):
    lams = _lams(ts)
    D = np.ascontiguousarray(ts.distances)
    brute = brute_jump_counts(D, lams)
    exact = np.array([kernels.exact_jumps(D, float(l))[0] for l in lams])
    greedy = np.array([kernels.greedy_jumps(D, float(l))[0] for l in lams])
    bad = int(np.sum(exact != brute))
    return [_rec(bad, 0, bad == 0, ratio=float(bad), param={"n": len(ts), "m": ts.bnorm.m},
                 witness={"lambdas": len(lams), "greedy_mismatches": int(np.sum(greedy != brute))})]


def _variation_oracle(ts, P):
    D = np.ascontiguousarray(ts.distances)
    worst = 0.0
    for r in P["r"]:
        a, b = variation(ts, r).value, brute_variation(D, r)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-300) if b else abs(a))
    return [_rec(worst, P["tol"], worst <= P["tol"], ratio=worst, param={"n": len(ts), "m": ts.bnorm.m})]


def _jump_variation_bound(ts, P):
    D = np.ascontiguousarray(ts.distances)
    levels = kernels.jump_levels(D)
    lams = jump_breakpoints(ts)
    counts = (levels[None, :] >= lams[:, None]).sum(axis=1) if lams.size else np.zeros(0)
    out = []
    for r in P["r"]:
        V = variation(ts, r).value
        lhs = float(np.max(lams * counts ** (1.0 / r), initial=0.0))
        out.append(_rec(lhs, V, lhs <= V * (1 + P["tol"]), param={"r": r, "kind": "jump-count"}))
    for r in P["r_sum"]:
        V = variation(ts, r).value
        bound = sum_norm_bound(ts, r)
        out.append(_rec(V, bound, V <= bound * (1 + P["tol"]), param={"r": r, "kind": "sum-bound"}))
    return out


def _load_series(d):
    return TimeSeries.from_dict(d)


# ------------------------------------------------------------ measure-lorentz


def _random_process(rng, atoms_max, n_max, n_min=2, m=1):
    a = int(rng.integers(1, atoms_max + 1))
    n = int(rng.integers(n_min, n_max + 1))
    w = rng.uniform(0.2, 1.0, a)
    v = rng.normal(size=(a, n, m))
    if rng.random() < 0.3:
        v = np.round(v)
    return SampledProcess(AtomicMeasureSpace(w), v)


def _process_instance(rng, P, i):
    return _random_process(rng, P["atoms_max"], P["n_max"])


def _variation_from_jumps(f, P):
    out = []
    for p in P["p_list"]:
        for r in P["r"]:
            c = variation_from_jumps_report(f, p, P["rho"], r)
            # reduction to a nonnegative process: same weak V^r norm; F counts
            # disjoint lambda-jumps, which N_{lambda/2}(f) dominates
            F = difference_process(f, r)
            a = lorentz_norm(f.variations(r), f.space, p, np.inf)
            b = lorentz_norm(F.lr_norms(r), F.space, p, np.inf)
            jf = jump_seminorm(f, p, np.inf, P["rho"]).value
            jF = difference_jump_seminorm(F, p, np.inf, P["rho"]).value
            reduction_ok = abs(a - b) <= 1e-12 * max(1.0, a) and jF <= 2 * jf * (1 + 1e-12)
            out.append(_rec(c.lhs, c.rhs, c.holds and reduction_ok,
                            param={"p": p, "rho": P["rho"], "r": r},
                            witness={"implied_constant": c.witness["implied_constant"],
                                     "reduction_ok": reduction_ok, "jump_ratio": safe_ratio(jF, jf)}))
    return out


def _convexity_instance(rng, P, i):
    n = int(rng.integers(1, P["atoms_max"] + 1))
    J = int(rng.integers(1, P["parts_max"] + 1))
    w = rng.uniform(0.1, 1.0, n)
    gs = rng.exponential(size=(J, n)) * (rng.random((J, n)) < 0.7)
    return {"weights": w, "gs": gs, "slack": rng.uniform(0, 1, J)}


def _convexity(inst, P):
    space = AtomicMeasureSpace(inst["weights"])
    gs = np.asarray(inst["gs"])
    norms = np.array([lorentz_norm(g, space, 1.0, np.inf) for g in gs])
    a = np.maximum(norms, 1e-3) * (1 + np.asarray(inst["slack"]))
    c = check_l1inf_logconvex(gs, a, space)
    out = [_rec(c.lhs, c.rhs, c.holds, param={"kind": "l1inf-logconvex"})]
    for p in P["p_convex"]:
        c = check_lpinf_pconvex(gs, p, space)
        out.append(_rec(c.lhs, c.params["C_p"] * c.rhs, c.holds, param={"kind": "lpinf-pconvex", "p": p}))
    return out


def _load_convexity(d):
    return {k: np.asarray(v) for k, v in d.items()}


# --------------------------------------------------------------- interpolation


def _equiv_instance(rng, P, i):
    # indices: independent random pairs, then pairs hill-climbed against one tuple
    T = P["trials"]
    if i < T:
        return {
            "base": _random_process(rng, P["atoms_max"], P["n_max"]),
            "doubled": _random_process(rng, 2 * P["atoms_max"], 2 * P["n_max"]),
        }
    tup = P["tuples"][(i - T) % len(P["tuples"])]
    obj = lambda f: _two_sided(jump_interp_equivalence(f, *tup, mode="brute"))
    out = {}
    for size, k in (("base", 1), ("doubled", 2)):
        starts = [_random_process(rng, k * P["atoms_max"], k * P["n_max"]) for _ in range(P["climb_starts"])]
        f = max(starts, key=obj)
        out[size] = _climb_process(f, obj, rng, P["climb_iters"])
    return out


def _equiv_count(P):
    return P["trials"] + P["climb"]


def _climb_process(f, objective, rng, iters, step=0.3):
    """Perturb values and weights of a process to increase ``objective``."""
    best, best_v = f, objective(f)
    for _ in range(iters):
        v = best.values + step * rng.normal(size=best.values.shape) * (rng.random(best.n_atoms) < 0.4)[:, None, None]
        w = best.space.weights * np.exp(0.3 * step * rng.normal(size=best.n_atoms))
        cand = SampledProcess(AtomicMeasureSpace(w), v, best.labels, best.bnorm)
        val = objective(cand)
        if val > best_v:
            best, best_v = cand, val
    return best


def _two_sided(c):
    return max(c.witness["I_over_J"], c.witness["J_over_I"]) if c.lhs > 0 else 1.0


def _equivalence(inst, P):
    out = []
    for size, f in (("base", inst["base"]), ("doubled", inst["doubled"])):
        for tup in P["tuples"]:
            p, q, rho, theta = tup
            c = jump_interp_equivalence(f, p, q, rho, theta, mode="brute")
            two = _two_sided(c)
            out.append(_rec(c.lhs, c.rhs, c.holds, ratio=c.witness["I_over_J"],
                            param={"tuple": list(tup), "size": size},
                            witness={"two_sided": two}))
    return out


def _equivalence_finish(report, P):
    C = {}
    for rec in report.records:
        key = (json.dumps(rec["param"]["tuple"]), rec["param"]["size"])
        C[key] = max(C.get(key, 1.0), rec["witness"]["two_sided"])
    table = {}
    for tup in P["tuples"]:
        k = json.dumps(list(tup))
        # every base-size process is also a doubled-size one
        base = C.get((k, "base"), 1.0)
        dbl = max(base, C.get((k, "doubled"), 1.0))
        grows = dbl > base * (1 + P["slack"])
        table[k] = {"C": base, "C_doubled": dbl, "grows": grows}
        if grows:
            report.fail(f"two-sided constant for {k} grew from {base:.4g} to {dbl:.4g} when sizes doubled")
    report.aggregate["constants"] = table


def _load_equiv(d):
    return {k: SampledProcess.from_dict(v) for k, v in d.items()}


def _kvector_instance(rng, P, i):
    return _random_process(rng, P["atoms_max"], P["n_max"])


def _kvector(f, P):
    out = []
    rho = P["rho"]
    for t in P["t"]:
        sup, psi, info = vector_k_sup(f, t, rho, P["s"])
        K = vector_k_rhs(f, t, rho, P["s"])[0]
        ratio = safe_ratio(sup, K ** rho)
        two = max(ratio, safe_ratio(1.0, ratio)) if sup > 0 else 1.0
        out.append(_rec(sup, K ** rho, math.isfinite(two), ratio=ratio, param={"t": t, "rho": rho},
                        witness={"two_sided": two, "psi_ok": psi.check(f.space.weights),
                                 "converged": info["converged"]}))
    # one-norm couple: the supremum has a closed form
    g = AtomicFunction(f.space, f.values[:, -1, 0] - f.values[:, 0, 0])
    for t in P["t"]:
        sup, _, _ = vector_k_sup(g, t, rho, same_norm=True)
        exact = water_filling(g.values, f.space.weights, rho, t)
        err = abs(sup - exact) / max(exact, 1e-300)
        out.append(_rec(sup, exact, err <= 1e-6, ratio=safe_ratio(sup, exact),
                        param={"t": t, "rho": rho, "kind": "same-norm"}, witness={"rel_error": err}))
    return out


def _kvector_finish(report, P):
    recs = [r for r in report.records if "two_sided" in r.get("witness", {})]
    C = max((r["witness"]["two_sided"] for r in recs), default=1.0)
    half = P["trials"] // 2
    C_half = max((r["witness"]["two_sided"] for r in recs if r["instance"] < half), default=1.0)
    stable = C <= C_half * (1 + P["slack"])
    report.aggregate.update({"C_rho": C, "C_rho_half": C_half, "stable": stable})
    if not stable:
        report.fail(f"C_rho moved from {C_half:.4g} to {C:.4g} between the first half and the full ensemble")


def _partition_instance(rng, P, i):
    f = _random_process(rng, P["atoms_max"], P["n_max"])
    n = f.n_atoms
    k = int(rng.integers(1, n + 1))
    lab = rng.integers(0, k, size=n)
    parts = [np.flatnonzero(lab == j).tolist() for j in range(k) if np.any(lab == j)]
    return {"process": f, "parts": parts}


def _partition(inst, P):
    out = []
    f = inst["process"]
    for p, theta in P["pairs"]:
        c = partition_interp_bound(f, inst["parts"], theta, p, P["s"])
        out.append(_rec(c.lhs, c.rhs, c.holds, param={"p": p, "theta": theta, "parts": len(inst["parts"])}))
        g = AtomicFunction(f.space, f.values[:, -1, 0])
        c = partition_interp_bound(g, inst["parts"], theta, p)
        out.append(_rec(c.lhs, c.rhs, c.holds, param={"p": p, "theta": theta, "kind": "scalar"}))
    return out


def _load_partition(d):
    return {"process": SampledProcess.from_dict(d["process"]), "parts": d["parts"]}


# ----------------------------------------------------------------- martingale


def _lepingle_instance(rng, P, i):
    # indices: dyadic walks (sign / gauss alternating), then random
    # refinements, then hill-climbed adversarial instances
    T, R = P["trials"], P["refinements"]
    if i < T:
        if i % 2 == 0:
            return dyadic_walk(int(rng.integers(1, P["depth_max"] + 1)), rng, P["m"], "sign", s=P["s"])
        return dyadic_walk(int(rng.integers(1, P["gauss_depth_max"] + 1)), rng, P["m"], "gauss", s=P["s"])
    if i < T + R:
        return random_refinement(int(rng.integers(2, 9)), int(rng.integers(1, 5)), rng, P["m"], P["s"])
    m = dyadic_walk(int(rng.integers(2, P["gauss_depth_max"] + 1)), rng, P["m"], "gauss", s=P["s"])
    obj = lambda mm: safe_ratio(jump_seminorm(mm.process, P["p"], P["p"], P["rho"]).value,
                                float(mm.lp_norms(P["p"]).max()))
    return hill_climb(m, obj, rng, iters=P["climb_iters"])[0]


def _lepingle_count(P):
    return P["trials"] + P["refinements"] + P["climb"]


def _lepingle(m, P):
    out = []
    p, rho = P["p"], P["rho"]
    lams = m.process.profile.global_breakpoints
    if lams.size > P["max_breakpoints"]:
        raise DomainError(f"{lams.size} breakpoints exceed max_breakpoints={P['max_breakpoints']}")
    bad0 = bad1 = 0
    worst = -np.inf
    for lam in lams:
        c = lepingle_split(m, float(lam), rho, extras=len(m.space) <= 64).cert
        bad0 += not c["f0_ok"]
        bad1 += not c["v1_ok"]
        worst = max(worst, -c["slack"])
    out.append(_rec(bad0 + bad1, 0, bad0 + bad1 == 0, ratio=float(bad0 + bad1),
                    param={"kind": "split-certificates", "atoms": len(m.space), "times": len(m)},
                    witness={"breakpoints": int(lams.size), "f0_violations": bad0,
                             "v1_violations": bad1}))
    c = verify_lepingle(m, p, rho, middle=P["middle"])
    out.append(_rec(c.lhs, c.params["constant"] * c.rhs if c.params["quantitative"] else c.rhs, c.holds,
                    ratio=c.ratio, param={"kind": "lepingle", "p": p, "rho": rho},
                    witness={k: v for k, v in c.witness.items() if k != "middle"}))
    for q in P["doob_p"]:
        d = doob_check(m, q)
        out.append(_rec(d.lhs, d.rhs, d.holds, param={"kind": "doob", "p": q}))
    return out


# ---------------------------------------------------------------------- markov


def _markov_instance(rng, P, i):
    n = int(P["n_levels"][i % len(P["n_levels"])])
    Q = random_doubly_stochastic(n, "birkhoff" if rng.random() < 0.5 else "sinkhorn", rng=rng)
    return {"Q": Q, "f": rng.normal(size=n)}


def _markov(inst, P):
    out = []
    Q, f = inst["Q"], inst["f"]
    for N in P["N_levels"]:
        c = verify_markov_jump(Q, f, P["p"], P["rho"], N=int(N))
        out.append(_rec(c.lhs, c.rhs, c.holds, param={"n": Q.n, "N": int(N)}))
    return out


def _markov_finish(report, P):
    best = {}
    for r in report.records:
        key = (r["param"]["n"], r["param"]["N"])
        best[key] = max(best.get(key, 0.0), r["ratio"])
    table = {f"n={n},N={N}": v for (n, N), v in sorted(best.items())}
    report.aggregate["max_ratio_by_size"] = table
    slack = P["slack"]
    ns, Ns = sorted(P["n_levels"]), sorted(P["N_levels"])
    for n in ns:
        for a, b in zip(Ns, Ns[1:]):
            if (n, b) in best and best[(n, b)] > best[(n, a)] * (1 + slack):
                report.fail(f"max ratio grew from N={a} to N={b} at n={n}")
    for N in Ns:
        for a, b in zip(ns, ns[1:]):
            if (b, N) in best and best[(b, N)] > best[(a, N)] * (1 + slack):
                report.fail(f"max ratio grew from n={a} to n={b} at N={N}")


def _dump_markov(inst):
    return {"Q": inst["Q"].to_dict(), "f": inst["f"]}


def _load_markov(d):
    from .markov import DoublyStochasticMatrix
    return {"Q": DoublyStochasticMatrix.from_dict(d["Q"]), "f": np.asarray(d["f"])}


# -------------------------------------------------------------------- sampling


@lru_cache(maxsize=4)
def _family(members, base):
    return dilated_cutoff(members=members, base=base)


def _sampling_instance(rng, P, i):
    k = int(rng.integers(1, P["support_max"] + 1))
    return LatticeSequence(rng.normal(size=k), (int(rng.integers(-100, 101)),))


def _sampling(f, P):
    c = check_restrict_extend(f)
    out = [_rec(c.lhs, c.rhs, c.holds, param={"kind": "restrict-extend", "support": f.shape[0]},
                witness=c.witness)]
    m = _family(P["members"], P["base"])
    for q in P["qs"]:
        c = check_decimation_identity(m, f, q)
        out.append(_rec(c.lhs, c.rhs, c.holds, param={"kind": "decimation", "q": q}))
    return out


def _load_sequence(d):
    v = np.asarray(d["values"], dtype=float)
    if "imag" in d:
        v = v + 1j * np.asarray(d["imag"])
    return LatticeSequence(v, tuple(d["start"]))


def _jump_transfer(P, seed):
    m = _family(P["members"], P["base"])
    return verify_jump_transfer(m, P["p"], P["rho"], tuple(P["qs"]), P["trials"], seed,
                                P["climb_steps"], P["slack"])


# --------------------------------------------------------------------- registry

_SERIES = dict(n_max=12, dims=(1, 3))

SUITES = {s.name: s for s in [
    Suite("jump-oracle", dict(_SERIES, trials=2000), _series_instance, _jump_oracle, _load_series),
    Suite("variation-oracle", dict(_SERIES, trials=2000, r=(0.5, 1, 1.5, 2, 3, np.inf), tol=1e-12),
          _series_instance, _variation_oracle, _load_series),
    Suite("jump-variation-bound", dict(_SERIES, trials=10000, r=(0.5, 1, 2, 3), r_sum=(1, 2, 3), tol=1e-12),
          _series_instance, _jump_variation_bound, _load_series),
    Suite("interp-equivalence", dict(trials=200, atoms_max=3, n_max=6, slack=0.10,
                                     tuples=((2, 2, 2, 0.75), (3, 3, 2, 2 / 3), (2, np.inf, 2, 0.75)),
                                     climb=30, climb_starts=8, climb_iters=60),
          _equiv_instance, _equivalence, _load_equiv, _equivalence_finish, count=_equiv_count),
    Suite("variation-from-jumps", dict(trials=200, atoms_max=4, n_max=8, p_list=(1, 2, 3), rho=2.0,
                                       r=(3.0, 4.0, np.inf)),
          _process_instance, _variation_from_jumps, SampledProcess.from_dict),
    Suite("convexity", dict(trials=1000, atoms_max=8, parts_max=6, p_convex=(0.25, 0.5, 0.75)),
          _convexity_instance, _convexity, _load_convexity),
    Suite("lepingle", dict(trials=500, p=2.0, rho=2.0, m=1, s=2.0, depth_max=12, gauss_depth_max=5,
                           doob_p=(2.0, 4.0), middle=False, refinements=100, climb=20, climb_iters=40,
                           max_breakpoints=4096),
          _lepingle_instance, _lepingle, FiniteMartingale.from_dict, count=_lepingle_count),
    Suite("markov", dict(trials=500, p=2.0, rho=2.0, n_levels=(4, 8, 16), N_levels=(16, 32, 64),
                         slack=0.10),
          _markov_instance, _markov, _load_markov, _markov_finish),
    Suite("sampling-identity", dict(trials=100, support_max=32, qs=(1, 2, 3), members=6, base=12.0),
          _sampling_instance, _sampling, _load_sequence),
    Suite("jump-transfer", dict(trials=16, p=2.0, rho=2.0, qs=(1, 2, 3), members=6, base=12.0,
                                climb_steps=10, slack=0.10),
          run_all=_jump_transfer),
    Suite("kvector", dict(trials=100, atoms_max=4, n_max=6, rho=2.0, s=1.0, t=(0.1, 1.0, 10.0), slack=0.10),
          _kvector_instance, _kvector, SampledProcess.from_dict, _kvector_finish),
    Suite("partition-split", dict(trials=100, atoms_max=4, n_max=5, s=1.0, pairs=((2.0, 0.75), (3.0, 0.5))),
          _partition_instance, _partition, _load_partition),
]}

_DUMP = {"markov": _dump_markov}


def _params(cfg):
    if cfg.suite not in SUITES:
        raise UsageError(f"unknown suite {cfg.suite!r}; choose from {', '.join(SUITES)}")
    suite = SUITES[cfg.suite]
    P = dict(suite.defaults)
    unknown = set(cfg.params) - set(P)
    if unknown:
        raise UsageError(f"suite {cfg.suite} has no parameter(s) {sorted(unknown)}")
    P.update(cfg.params)
    if cfg.trials is not None:
        P["trials"] = cfg.trials
    if cfg.tol is not None and "tol" in P:
        P["tol"] = cfg.tol
    if int(P["trials"]) < 1:
        raise UsageError("empty ensemble: trials must be at least 1")
    P["trials"] = int(P["trials"])
    return suite, P


def _instance_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _evaluate(args):
    name, P, seed, index = args
    suite = SUITES[name]
    inst = suite.make(_instance_rng(seed, index), P, index)
    return index, suite.check(inst, P)


def _dump(name, inst):
    return jsonable(_DUMP[name](inst) if name in _DUMP else inst)


def run_suite(cfg):
    """Run a suite; returns a ``Report`` (and writes outputs when ``cfg.out`` is set)."""
    suite, P = _params(cfg)
    if suite.run_all is not None:
        report = suite.run_all(P, cfg.seed)
        report.suite, report.params = suite.name, jsonable(P)
    else:
        report = Report(suite.name, jsonable(P), seed=cfg.seed)
        tasks = [(suite.name, P, cfg.seed, i) for i in range(suite.size(P))]
        if cfg.workers and cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as ex:
                results = list(ex.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (8 * cfg.workers))))
        else:
            results = [_evaluate(t) for t in tasks]
        for index, recs in sorted(results, key=lambda r: r[0]):
            for rec in recs:
                rec["instance"] = index
                report.records.append(rec)
                if not rec["holds"]:
                    report.passed = False
        failing = sorted({r["instance"] for r in report.records if not r["holds"]})
        for index in failing[:10]:
            inst = suite.make(_instance_rng(cfg.seed, index), P, index)
            report.failures.append({"message": "assertion failed", "index": index,
                                    "instance": _dump(suite.name, inst)})
        if suite.finish is not None:
            suite.finish(report, P)
    report.summarize()
    if cfg.out:
        write_outputs(report, cfg.out)
    return report


def write_outputs(report, out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_json(out / f"{report.suite}.json")
    report.write_csv(out / f"{report.suite}.csv")
    for k, fail in enumerate(report.failures):
        if fail.get("instance") is None:
            continue
        payload = {"suite": report.suite, "params": report.params, "seed": report.seed,
                   "index": fail.get("index"), "instance": fail["instance"], "version": __version__}
        with open(out / f"{report.suite}-failure-{k}.json", "w") as fh:
            json.dump(jsonable(payload), fh, indent=2, sort_keys=True)


def _restore(value):
    # JSON turned inf into "inf" and tuples into lists
    if isinstance(value, str) and value in ("inf", "-inf"):
        return float(value)
    if isinstance(value, list):
        return tuple(_restore(v) for v in value)
    return value


def replay(payload):
    """Re-run a serialised failing instance; returns its records."""
    name = payload.get("suite")
    if name not in SUITES or SUITES[name].check is None:
        raise UsageError(f"cannot replay suite {name!r}")
    suite = SUITES[name]
    P = {k: _restore(v) for k, v in payload["params"].items()}
    data = payload.get("instance")
    if data is not None and suite.load is not None:
        inst = suite.load(data)
    else:
        inst = suite.make(_instance_rng(payload["seed"], payload["index"]), P, payload["index"])
    return suite.check(inst, P)
