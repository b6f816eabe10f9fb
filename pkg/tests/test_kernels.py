"""The numba and numpy kernels agree, and the environment switch selects numpy."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from jumpinterp import _kernels_numpy as npk
from jumpinterp._accel import HAS_NUMBA

nbk = pytest.importorskip("jumpinterp._kernels_numba") if HAS_NUMBA else None
pytestmark = pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")


def dist(v):
    v = np.asarray(v, dtype=float)
    return np.ascontiguousarray(np.abs(v[None, :] - v[:, None]))


vals = st.integers(1, 14).flatmap(lambda n: arrays(float, n, elements=st.floats(-5, 5, width=64)))


@given(vals, st.floats(0.01, 6))
def test_jump_kernels_agree(v, lam):
    D = dist(v)
    for name in ("greedy_jumps", "exact_jumps"):
        a, b = getattr(npk, name)(D, lam), getattr(nbk, name)(D, lam)
        assert int(a[0]) == int(b[0])
        assert list(np.asarray(a[1])) == list(np.asarray(b[1]))


@given(vals)
def test_levels_agree(v):
    D = dist(v)
    assert np.array_equal(npk.jump_levels(D), nbk.jump_levels(D))


@given(st.integers(1, 4), st.integers(1, 9), st.integers(0, 10 ** 6))
def test_levels_many_agree(atoms, n, seed):
    v = np.random.default_rng(seed).normal(size=(atoms, n))
    D3 = np.ascontiguousarray(np.abs(v[:, None, :] - v[:, :, None]))
    a, b = npk.jump_levels_many(D3), nbk.jump_levels_many(D3)
    assert a.shape == b.shape
    assert np.array_equal(a, b)


@given(vals, st.sampled_from([0.5, 1.0, 2.0, 3.5]))
def test_variation_agrees(v, r):
    D = dist(v)
    a, b = npk.variation_dp(D, r), nbk.variation_dp(D, r)
    assert a[0] == pytest.approx(b[0], rel=1e-13, abs=1e-300)


@given(vals, st.sampled_from([1.0, 2.0]))
def test_tube_agrees(v, s):
    eps = np.linspace(0, 10, 17)
    a = npk.tube_variation(np.ascontiguousarray(v), eps, s)
    b = nbk.tube_variation(np.ascontiguousarray(v), eps, s)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_environment_selects_numpy():
    env = dict(os.environ, JUMPINTERP_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", "from jumpinterp import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
