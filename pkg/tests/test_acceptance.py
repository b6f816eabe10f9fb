"""Acceptance criteria at their stated ensemble sizes and tolerances.

Each test prints one ``[criterion k] PASS|FAIL`` line with its key numbers.
"""

import math
import os
import time

import numpy as np
import pytest

from jumpinterp.suites import SuiteConfig, run_suite

pytestmark = pytest.mark.acceptance
WORKERS = os.cpu_count() or 1
_cache = {}


def suite(name, **kw):
    """Run each suite once per session at full size; returns (report, seconds)."""
    key = (name, tuple(sorted(kw.items())))
    if key not in _cache:
        t = time.perf_counter()
        out = kw.pop("out", None)
        rep = run_suite(SuiteConfig(name, params=kw, seed=20240601, workers=WORKERS, out=out))
        _cache[key] = (rep, time.perf_counter() - t)
    return _cache[key]


def line(capsys, k, ok, text):
    with capsys.disabled():
        print(f"\n[criterion {k:2d}] {'PASS' if ok else 'FAIL'}  {text}")
    return ok


def records(rep, **match):
    return [r for r in rep.records if all(r["param"].get(k) == v for k, v in match.items())]


# ------------------------------------------------------------------ core-seq


def test_c01_jump_count_oracle(capsys):
    rep, sec = suite("jump-oracle")
    dims = [r["param"]["m"] for r in rep.records]
    mism = sum(int(r["lhs"]) for r in rep.records)
    lams = sum(r["witness"]["lambdas"] for r in rep.records)
    ok = (mism == 0 and dims.count(1) == 1000 and dims.count(3) == 1000
          and max(r["param"]["n"] for r in rep.records) <= 12 and sec < 60)
    assert line(capsys, 1, ok, f"N_lambda vs exhaustive: {mism} mismatches over {len(dims)} series, "
                               f"{lams} levels, {sec:.1f}s")


@pytest.mark.xfail(strict=True, reason="the greedy stopping-time count is not the supremum: "
                                       "[1, 0, 2] at lambda=2 gives greedy 0, exhaustive 1")
def test_c01_literal_greedy_scan(capsys):
    rep, _ = suite("jump-oracle")
    bad = sum(r["witness"]["greedy_mismatches"] for r in rep.records)
    ok = bad == 0
    line(capsys, 1, ok, f"literal greedy scan vs exhaustive: {bad} mismatches (expected failure)")
    assert ok


def test_c02_variation_oracle(capsys):
    rep, sec = suite("variation-oracle")
    worst = max(r["lhs"] for r in rep.records)
    ok = rep.passed and len(rep.records) == 2000 and worst <= 1e-12 and sec < 120
    assert line(capsys, 2, ok, f"max relative error {worst:.2e} over r in {{0.5,1,1.5,2,3,inf}}, {sec:.1f}s")


def test_c03_jump_count_below_variation(capsys):
    rep, _ = suite("jump-variation-bound")
    recs = [r for r in rep.records if r["param"]["kind"] == "jump-count"]
    bad = sum(not r["holds"] for r in recs)
    n = len({r["instance"] for r in recs})
    ok = bad == 0 and n == 10_000
    assert line(capsys, 3, ok, f"lambda N^(1/r) <= V^r: {bad} violations on {n} instances, "
                               f"max ratio {max(r['ratio'] for r in recs):.15f}")


def test_c04_variation_below_sum_of_norms(capsys):
    rep, _ = suite("jump-variation-bound")
    recs = [r for r in rep.records if r["param"]["kind"] == "sum-bound"]
    bad = sum(not r["holds"] for r in recs)
    ok = bad == 0 and len({r["instance"] for r in recs}) == 10_000
    assert line(capsys, 4, ok, f"V^r <= 2 (sum ||f||^r)^(1/r): {bad} violations, "
                               f"max ratio {max(r['ratio'] for r in recs):.4f}")


# ------------------------------------------------------------ interpolation


def test_c05_jump_interpolation_equivalence(capsys):
    rep, sec = suite("interp-equivalence")
    base = [r for r in rep.records if r["param"]["size"] == "base" and r["instance"] < rep.params["trials"]]
    C = {}
    for r in base:
        k = str(r["param"]["tuple"])
        C[k] = max(C.get(k, 1.0), r["witness"]["two_sided"])
    ok = (all(r["holds"] for r in rep.records) and len({r["instance"] for r in base}) == 200
          and len(C) == 3 and all(math.isfinite(c) for c in C.values()) and sec < 600)
    desc = "; ".join(f"{k}: C={v:.3f}" for k, v in C.items())
    assert line(capsys, 5, ok, f"I/J and J/I in [1/C, C] on 200 random processes: {desc}; {sec:.1f}s")


@pytest.mark.xfail(strict=True, reason="the best constant over <= 3 atoms / <= 6 indices is still below its "
                                       "limit; climbed estimates rise 9-13% at double size, then level off")
def test_c05_constant_stable_under_doubling(capsys):
    rep, _ = suite("interp-equivalence")
    consts = rep.aggregate["constants"]
    ok = not any(c["grows"] for c in consts.values())
    desc = "; ".join(f"{k}: C={v['C']:.3f} doubled {v['C_doubled']:.3f} (+{100 * (v['C_doubled'] / v['C'] - 1):.1f}%)"
                     for k, v in consts.items())
    line(capsys, 5, ok, f"C under doubling (slack 10%): {desc} (expected failure)")
    assert ok


# --------------------------------------------------------------- martingale


def test_c06_stopping_split_certificates(capsys):
    rep, _ = suite("lepingle")
    recs = records(rep, kind="split-certificates")
    bad = sum(int(r["lhs"]) for r in recs)
    lams = sum(r["witness"]["breakpoints"] for r in recs)
    ok = bad == 0 and len(recs) >= 500
    assert line(capsys, 6, ok, f"{bad} pointwise violations over {len(recs)} martingales and {lams} breakpoints")


def test_c07_quantitative_lepingle(capsys):
    rep, sec = suite("lepingle")
    recs = records(rep, kind="lepingle")
    dyadic = [r for r in recs if r["instance"] < rep.params["trials"]]
    bad = sum(not r["holds"] for r in recs)
    worst = max(r["ratio"] for r in recs)
    ok = bad == 0 and len(dyadic) == 500 and len(recs) > 500 and worst <= 3 and sec < 300
    assert line(capsys, 7, ok, f"J <= 3 sup ||f_t||_2: {bad} violations, max J/sup {worst:.4f} "
                               f"on {len(recs)} martingales, {sec:.1f}s")


def test_c08_doob(capsys):
    rep, _ = suite("lepingle")
    out = []
    ok = True
    for p in (2.0, 4.0):
        recs = records(rep, kind="doob", p=p)
        bad = sum(not r["holds"] for r in recs)
        ok &= bad == 0 and len(recs) >= 500
        out.append(f"p={p:g}: {bad} violations, max ratio {max(r['ratio'] for r in recs):.4f}")
    assert line(capsys, 8, ok, "; ".join(out))


# ------------------------------------------------------------------- markov


def test_c09_markov_sweep(capsys, tmp_path):
    rep, _ = suite("markov", out=str(tmp_path))
    table = rep.aggregate["max_ratio_by_size"]
    finite = all(math.isfinite(v) for v in table.values())
    n = len({r["instance"] for r in rep.records})
    ok = rep.passed and finite and n == 500 and (tmp_path / "markov.json").exists()
    assert line(capsys, 9, ok, f"max ratio by (n, N): " + ", ".join(f"{k}: {v:.4f}" for k, v in table.items()))


# ------------------------------------------------------------------ lorentz


def test_c10_convexity(capsys):
    rep, _ = suite("convexity")
    parts = []
    ok = len({r["instance"] for r in rep.records}) == 1000
    for kind, p in (("l1inf-logconvex", None), ("lpinf-pconvex", 0.25), ("lpinf-pconvex", 0.5),
                    ("lpinf-pconvex", 0.75)):
        recs = [r for r in rep.records if r["param"]["kind"] == kind and r["param"].get("p") == p]
        bad = sum(not r["holds"] for r in recs)
        ok &= bad == 0 and len(recs) == 1000
        parts.append(f"{kind}{'' if p is None else f' p={p}'}: {bad} violations")
    assert line(capsys, 10, ok, "; ".join(parts))


# ----------------------------------------------------------------- sampling


def test_c11_sampling_identities(capsys):
    rep, sec = suite("sampling-identity")
    re = [r for r in rep.records if r["param"]["kind"] == "restrict-extend"]
    dec = [r for r in rep.records if r["param"]["kind"] == "decimation"]
    ok = (rep.passed and len(re) == 100 and all(r["rhs"] == 1e-6 for r in re)
          and {r["param"]["q"] for r in dec} == {1, 2, 3} and sec < 300)
    assert line(capsys, 11, ok, f"RE = id max error {max(r['lhs'] for r in re):.2e} (tol 1e-6); decimation "
                                f"max error/budget {max(r['ratio'] for r in dec):.2e}; {sec:.1f}s")


def test_c12_jump_transference(capsys, tmp_path):
    rep, _ = suite("jump-transfer", out=str(tmp_path))
    agg = rep.aggregate
    ok = (rep.passed and agg["stable"] and math.isfinite(agg["C"])
          and {r["param"]["q"] for r in rep.records} == {1, 2, 3} and (tmp_path / "jump-transfer.json").exists())
    assert line(capsys, 12, ok, f"C = {agg['C']:.4f} (half ensemble {agg['C_half']:.4f}), "
                                f"per q: " + ", ".join(f"{r['param']['q']}: {r['ratio']:.4f}" for r in rep.records))


def test_c13_vector_k_two_sided(capsys):
    rep, _ = suite("kvector")
    agg = rep.aggregate
    n = len({r["instance"] for r in rep.records})
    ok = rep.passed and agg["stable"] and n == 100 and np.isfinite(agg["C_rho"])
    assert line(capsys, 13, ok, f"C_rho = {agg['C_rho']:.4f} (first half {agg['C_rho_half']:.4f}) on {n} instances")
