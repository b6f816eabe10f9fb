"""Command line: ``jumpinterp verify <suite>`` and ``jumpinterp compute <kind>``.

Exit status is 0 when every check holds, 1 when a check fails and 2 for
usage or input errors.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import jump_count, variation
from .errors import ConvergenceError, DomainError, InputError, ToleranceError
from .interpolation import CoupleElement, interp_norm, jump_couple, k_functional
from .io import load_json, read_martingale, read_matrix, read_process, read_timeseries
from .lorentz import jump_seminorm
from .markov import semigroup_orbit
from .martingale import square_function
from .report import Report, jsonable
from .suites import SUITES, SuiteConfig, replay, run_suite, write_outputs

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
KINDS = ("Nlambda", "Vr", "jump", "K", "interp", "square", "orbit")


def _exponent(text):
    v = float(text)
    if np.isnan(v):
        raise argparse.ArgumentTypeError("exponent cannot be nan")
    return v


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    ap = argparse.ArgumentParser(prog="jumpinterp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", nargs="?", help="one of: " + ", ".join(SUITES) + " (omit with --replay)")
    v.add_argument("--p", type=_exponent)
    v.add_argument("--q", type=_exponent)
    v.add_argument("--rho", type=_exponent)
    v.add_argument("--theta", type=float)
    v.add_argument("--r", type=_exponent)
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--out", help="directory for <suite>.json, <suite>.csv and failure files")
    v.add_argument("--replay", metavar="FILE", help="re-run a serialised failing instance")

    c = sub.add_parser("compute", help="evaluate one quantity on input data")
    c.add_argument("kind", choices=KINDS)
    c.add_argument("--in", dest="path", required=True)
    c.add_argument("--lam", type=_floats, help="levels for Nlambda")
    c.add_argument("--p", type=_exponent, default=2.0)
    c.add_argument("--q", type=_exponent)
    c.add_argument("--rho", type=_exponent, default=2.0)
    c.add_argument("--theta", type=float, default=0.5)
    c.add_argument("--r", type=_exponent, default=2.0)
    c.add_argument("--t", type=_floats, help="K-functional parameters")
    c.add_argument("--mode", choices=("brute", "constructive", "numeric"), default="brute")
    c.add_argument("--N", type=int, default=64, help="orbit length")
    c.add_argument("--f", help="orbit start: comma-separated values or a JSON/CSV file")
    c.add_argument("--out", help="write the result as JSON (and CSV when tabular)")
    return ap


# ----------------------------------------------------------------- verify


def _suite_params(name, args):
    """Map the generic exponent flags onto a suite's parameters."""
    D = SUITES[name].defaults
    P, used = {}, set()
    if name == "interp-equivalence" and any(getattr(args, k) is not None for k in ("p", "q", "rho", "theta")):
        p0, q0, rho0, th0 = D["tuples"][0]
        p = args.p if args.p is not None else p0
        q = args.q if args.q is not None else p
        P["tuples"] = ((p, q, args.rho or rho0, args.theta or th0),)
        used |= {"p", "q", "rho", "theta"}
    if name == "partition-split" and (args.p is not None or args.theta is not None):
        p0, th0 = D["pairs"][0]
        P["pairs"] = ((args.p or p0, args.theta or th0),)
        used |= {"p", "theta"}
    for flag, keys in (("p", ("p", "p_list")), ("rho", ("rho",)), ("r", ("r",))):
        val = getattr(args, flag)
        if val is None or flag in used:
            continue
        for key in keys:
            if key in D:
                P[key] = val if key == flag and not isinstance(D[key], tuple) else (val,)
                used.add(flag)
                break
    for flag in ("p", "q", "rho", "theta", "r"):
        if getattr(args, flag) is not None and flag not in used:
            raise InputError(f"suite {name} does not take --{flag}")
    return P


def _verify(args):
    if args.replay:
        payload = load_json(args.replay)
        records = replay(payload)
        ok = all(r["holds"] for r in records)
        print(json.dumps(jsonable({"suite": payload.get("suite"), "index": payload.get("index"),
                                   "passed": ok, "records": records}), indent=2))
        return EXIT_OK if ok else EXIT_FAIL
    if args.suite is None:
        raise InputError("verify needs a suite name or --replay FILE")
    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    cfg = SuiteConfig(args.suite, _suite_params(args.suite, args), args.trials, args.seed,
                      args.tol, args.out, args.workers)
    report = run_suite(cfg)
    agg = {k: v for k, v in report.aggregate.items() if k != "chain"}
    print(f"{report.suite}: {'PASS' if report.passed else 'FAIL'} {json.dumps(jsonable(agg))}")
    for f in report.failures[:5]:
        print(f"  failure: {f['message']}" + (f" (instance {f['index']})" if "index" in f else ""))
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- compute


def _orbit_start(text, n):
    if text is None:
        raise InputError("orbit needs --f")
    if Path(text).exists():
        if text.endswith(".csv"):
            from .io import read_csv_matrix
            f = read_csv_matrix(text)
        else:
            f = np.asarray(load_json(text), dtype=float)
    else:
        f = np.asarray(_floats(text))
    if f.shape[0] != n:
        raise InputError(f"--f has {f.shape[0]} entries, the matrix has {n} states")
    return f


def _compute(args):
    kind = args.kind
    result, rows = {"kind": kind}, None
    if kind in ("Nlambda", "Vr"):
        ts = read_timeseries(args.path)
        if kind == "Nlambda":
            if not args.lam:
                raise InputError("Nlambda needs --lam")
            rows = []
            for lam in args.lam:
                n, w = jump_count(ts, lam)
                rows.append({"lambda": lam, "N": n, "times": w.times})
            result["values"] = rows
        else:
            v = variation(ts, args.r)
            result.update(r=args.r, value=v.value, times=v.times)
    elif kind in ("jump", "K", "interp"):
        f = read_process(args.path)
        q = args.q if args.q is not None else args.p
        if kind == "jump":
            J = jump_seminorm(f, args.p, q, args.rho)
            result.update(p=args.p, q=q, rho=args.rho, value=J.value, argmax_lambda=J.argmax_lambda)
        else:
            elem = CoupleElement(f, jump_couple(args.theta, args.p, q, args.rho))
            result.update(p=args.p, q=q, rho=args.rho, theta=args.theta, couple=elem.couple.to_dict())
            if kind == "K":
                if not args.t:
                    raise InputError("K needs --t")
                rows = []
                for t in args.t:
                    k = k_functional(elem, t, args.mode)
                    rows.append({"t": t, "K": k.value, "lower": k.lower, "certified": k.certified})
                result["values"] = rows
            else:
                value, terms = interp_norm(elem, args.theta, mode=args.mode, details=True)
                result.update(value=value, terms={str(j): v for j, v in terms.items()})
    elif kind == "square":
        m = read_martingale(args.path)
        S = square_function(m, args.rho)
        result.update(rho=args.rho, values=S)
        rows = [{"atom": i, "S": float(s)} for i, s in enumerate(S)]
    else:
        Q = read_matrix(args.path)
        f = _orbit_start(args.f, Q.n)
        orb = semigroup_orbit(Q, f, args.N)
        result.update(N=args.N, labels=orb.labels, values=orb.values[..., 0] if orb.values.shape[2] == 1
                      else orb.values)
    print(json.dumps(jsonable(result), indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{kind}.json").write_text(json.dumps(jsonable(result), indent=2))
        if rows:
            import csv
            with open(out / f"{kind}.csv", "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]))
                w.writeheader()
                for r in rows:
                    w.writerow({k: json.dumps(jsonable(v)) if isinstance(v, list) else v for k, v in r.items()})
    return EXIT_OK


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return _verify(args) if args.command == "verify" else _compute(args)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, ToleranceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
