"""Time the numba and numpy kernel backends on the same random inputs.

    python3 benchmarks/bench_kernels.py [--n 64] [--atoms 32] [--repeat 5]

Numba timings exclude compilation (each kernel is called once before timing).
"""

import argparse
import timeit

import numpy as np

from jumpinterp import _kernels_numpy as numpy_impl

try:
    from jumpinterp import _kernels_numba as numba_impl
except ImportError:  # numba missing
    numba_impl = None


def distances(rng, n, m=1):
    x = rng.normal(size=(n, m)).cumsum(axis=0)
    return np.ascontiguousarray(np.linalg.norm(x[None, :, :] - x[:, None, :], axis=2))


def cases(rng, n, atoms):
    D = distances(rng, n)
    D3 = np.ascontiguousarray(np.stack([distances(rng, n) for _ in range(atoms)]))
    lam = float(np.median(D))
    return {
        "exact_jumps": lambda impl: impl.exact_jumps(D, lam),
        "jump_levels": lambda impl: impl.jump_levels(D),
        "jump_levels_many": lambda impl: impl.jump_levels_many(D3),
        "variation_dp": lambda impl: impl.variation_dp(D, 2.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64, help="series length")
    ap.add_argument("--atoms", type=int, default=32, help="stack size for jump_levels_many")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = {"numpy": numpy_impl}
    if numba_impl is not None:
        impls["numba"] = numba_impl
    print(f"n={args.n} atoms={args.atoms} (best of {args.repeat}, seconds per call)")
    print(f"{'kernel':<18}" + "".join(f"{k:>12}" for k in impls) + f"{'speedup':>10}")
    for name, call in cases(np.random.default_rng(args.seed), args.n, args.atoms).items():
        times = {}
        for key, impl in impls.items():
            call(impl)  # warm up / compile
            number = 1 if key == "numpy" and name.startswith("jump_levels") else 5
            times[key] = min(timeit.repeat(lambda: call(impl), number=number, repeat=args.repeat)) / number
        speed = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        print(f"{name:<18}" + "".join(f"{t:>12.2e}" for t in times.values()) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
