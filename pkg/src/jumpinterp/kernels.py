"""Dispatch to the numba or numpy implementation of the hot kernels.

The backend is chosen once at import time from ``JUMPINTERP_BACKEND``
(see ``_accel``).  Both implementations stay importable for benchmarks and
cross-checks.

Kernels
-------
greedy_jumps(D, lam) -> (count, times)
    Stopping-time scan over a pairwise distance matrix ``D``: the next time
    is the first index whose distance to the current anchor is ``>= lam``.
exact_jumps(D, lam) -> (count, times)
    Longest chain ``t_0 < ... < t_J`` with every consecutive distance
    ``>= lam``, by an O(n^2) dynamic programme (ties go to the first index).
jump_levels(D) -> levels
    ``levels[k-1]`` is the largest ``lam`` admitting ``k`` jumps (bottleneck
    dynamic programme, O(n^3)); nonincreasing in ``k``.
jump_levels_many(D3) -> (atoms, n-1) array
    ``jump_levels`` for a stack of distance matrices, zero padded.
variation_dp(D, r) -> (sum of r-th powers, optimal index path)
    O(n^2) dynamic programme for the r-variation, finite ``r``.
tube_variation(f, eps, s) -> array
    For a scalar sequence ``f`` and oscillation budgets ``eps``, the least
    s-variation of a sequence staying within ``eps/2`` of ``f`` (lazy path).

``lazy_path`` (numpy only, not hot) returns that path for a single budget.
"""

from . import _kernels_numpy as numpy_impl
from ._accel import requested_backend

BACKEND = requested_backend()

if BACKEND == "numba":
    from . import _kernels_numba as numba_impl
    _impl = numba_impl
else:
    numba_impl = None
    _impl = numpy_impl

greedy_jumps = _impl.greedy_jumps
exact_jumps = _impl.exact_jumps
jump_levels = _impl.jump_levels
jump_levels_many = _impl.jump_levels_many
variation_dp = _impl.variation_dp
tube_variation = _impl.tube_variation
lazy_path = numpy_impl.lazy_path
