import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jumpinterp.errors import DomainError, InputError
from jumpinterp.interpolation import (
    AtomicFunction,
    CoupleElement,
    SameNormCouple,
    TruncationCouple,
    VariationCouple,
    forward_chain_check,
    interp_norm,
    jump_couple,
    jump_interp_equivalence,
    k_functional,
    partition_interp_bound,
    single_atom_interp,
    triangle_check,
    vector_k_rhs,
    vector_k_sup,
    water_filling,
)
from jumpinterp.lorentz import AtomicMeasureSpace, SampledProcess


def random_process(seed, atoms=3, n=6):
    rng = np.random.default_rng(seed)
    a = int(rng.integers(1, atoms + 1))
    k = int(rng.integers(2, n + 1))
    return SampledProcess(AtomicMeasureSpace(rng.uniform(0.2, 1.0, a)), rng.normal(size=(a, k, 1)))


seeds = st.integers(0, 10 ** 6)
ts_ = st.sampled_from([0.05, 0.3, 1.0, 3.0, 20.0])


# ------------------------------------------------------------- K-functional


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 10.0])
def test_truncation_single_atom_closed_form(t):
    # K(t) = |c| min(1, t w^(1/P)): the budget cost is linear in eps
    c, w, P = -2.5, 0.3, 2.0
    g = AtomicFunction(AtomicMeasureSpace([w]), [c])
    k = k_functional(CoupleElement(g, TruncationCouple(P)), t)
    assert k.value == pytest.approx(abs(c) * min(1.0, t * w ** (1 / P)), rel=1e-4)
    assert k.lower <= k.value


@pytest.mark.parametrize("theta,P", [(0.5, 2.0), (0.75, 4.0 / 3), (0.3, 5.0)])
def test_single_atom_interp_matches_scan(theta, P):
    c, w = 1.7, 0.2
    g = AtomicFunction(AtomicMeasureSpace([w]), [c])
    scan = interp_norm(CoupleElement(g, TruncationCouple(P)), theta)
    assert scan == pytest.approx(single_atom_interp(c, w, theta, P), rel=1e-4)


def test_same_norm_couple():
    k = k_functional(CoupleElement(np.array([3.0, 4.0]), SameNormCouple()), 0.5)
    assert k.value == 2.5 and k.certified


@given(seeds, ts_)
def test_modes_bracket_each_other(seed, t):
    f = random_process(seed, atoms=2, n=4)
    elem = CoupleElement(f, jump_couple(0.75, 2, 2, 2))
    brute = k_functional(elem, t, "brute")
    cons = k_functional(elem, t, "constructive")
    assert brute.lower <= cons.value * (1 + 1e-12)
    assert brute.value <= cons.value * (1 + 1e-4)
    assert brute.splitting.verify(elem) and cons.splitting.verify(elem)


@pytest.mark.parametrize("seed", range(3))
def test_numeric_mode_is_an_upper_bound(seed):
    f = random_process(seed, atoms=2, n=3)
    elem = CoupleElement(f, jump_couple(0.5, 2, 2, 2))
    brute = k_functional(elem, 1.0, "brute")
    num = k_functional(elem, 1.0, "numeric")
    assert num.value >= brute.lower * (1 - 1e-9)
    assert num.splitting.verify(elem)


@given(seeds)
def test_k_is_concave_nondecreasing_and_capped(seed):
    f = random_process(seed)
    elem = CoupleElement(f, VariationCouple(1.5, 2.0, 2.0))
    t = np.array([0.1, 0.4, 0.7, 1.0, 2.5, 4.0])
    k = np.array([k_functional(elem, x).value for x in t])
    a0, a1 = elem.couple.norm0(f), elem.couple.norm1(f)
    assert np.all(k <= np.minimum(a0, t * a1) * (1 + 1e-12))
    assert np.all(np.diff(k) >= -1e-4 * k.max())
    lower = np.array([k_functional(elem, x).lower for x in t])
    # chord between neighbours lies below the (certified) lower value
    mid = lower[1:-1]
    chord = k[:-2] + (k[2:] - k[:-2]) * (t[1:-1] - t[:-2]) / (t[2:] - t[:-2])
    assert np.all(mid >= chord * (1 - 1e-3) - 1e-12)


def test_vector_valued_needs_numeric():
    f = SampledProcess(AtomicMeasureSpace([1.0]), np.zeros((1, 3, 2)))
    f = f.with_values(np.random.default_rng(0).normal(size=(1, 3, 2)))
    with pytest.raises(DomainError):
        k_functional(CoupleElement(f, VariationCouple(1, 1, 1)), 1.0)


# ------------------------------------------------------ interpolation norms


@given(seeds, st.sampled_from([(2, 2, 2, 0.75), (3, 3, 2, 2 / 3), (2, np.inf, 2, 0.75)]))
def test_jump_interp_equivalence(seed, tup):
    c = jump_interp_equivalence(random_process(seed), *tup)
    assert c.holds
    if c.lhs > 0:
        assert c.witness["I_over_J"] * c.witness["J_over_I"] == pytest.approx(1.0)


def test_equivalence_domain():
    with pytest.raises(DomainError):
        jump_interp_equivalence(random_process(0), 2, 2, 1.0, 0.5)


@given(seeds, st.sampled_from([(2, 2, 2, 0.75), (2, np.inf, 3, 0.5)]))
def test_forward_chain_at_every_breakpoint(seed, tup):
    f = random_process(seed)
    for lam in np.unique(f.distances[f.distances > 0]):
        assert forward_chain_check(f, lam, *tup).holds


@given(seeds, seeds)
def test_triangle_constant_finite(a, b):
    f = random_process(a, atoms=2, n=4)
    g = random_process(b, atoms=2, n=4)
    if f.values.shape != g.values.shape:
        return
    g = SampledProcess(f.space, g.values)
    assert triangle_check(f, g, 2, 2, 2).holds


def test_zero_interp_norm():
    f = SampledProcess(AtomicMeasureSpace([1.0]), np.ones((1, 3)))
    assert interp_norm(CoupleElement(f, jump_couple(0.5, 2, 2, 2)), 0.5) == 0.0


# ------------------------------------------------------- vector K functional


def test_water_filling_frozen():
    c, w = np.array([2.0, 1.0]), np.array([1.0, 1.0])
    assert water_filling(c, w, 2, 1.0) == pytest.approx(4.0)
    assert water_filling(c, w, 2, math.sqrt(2)) == pytest.approx(5.0)
    assert water_filling(c, w, 2, 10.0) == pytest.approx(5.0)


@given(seeds, ts_)
def test_psi_sup_same_norm_matches_water_filling(seed, t):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    g = AtomicFunction(AtomicMeasureSpace(rng.uniform(0.2, 1, n)), rng.normal(size=n))
    sup, psi, _ = vector_k_sup(g, t, 2.0, same_norm=True)
    assert sup == pytest.approx(water_filling(g.values, g.space.weights, 2.0, t), rel=1e-6)
    assert psi.check(g.space.weights)


@given(seeds, ts_)
def test_psi_sup_below_k_power(seed, t):
    # Minkowski over any splitting bounds the psi-sum by K^rho
    f = random_process(seed, atoms=4)
    sup, psi, info = vector_k_sup(f, t, 2.0)
    K = vector_k_rhs(f, t, 2.0)[0]
    assert sup <= K ** 2 * (1 + 1e-9) + 1e-300
    assert psi.check(f.space.weights)


# --------------------------------------------------------------- partitions


@given(seeds, st.sampled_from([(2.0, 0.75), (3.0, 0.5)]))
def test_partition_bound_finite(seed, pt):
    f = random_process(seed, atoms=4, n=4)
    n = f.n_atoms
    parts = [[a] for a in range(n)]
    assert partition_interp_bound(f, parts, pt[1], pt[0]).holds


def test_partition_trivial_split_is_identity():
    f = random_process(5, atoms=3, n=4)
    c = partition_interp_bound(f, [list(range(f.n_atoms))], 0.75, 2.0)
    assert c.ratio == pytest.approx(1.0)


def test_partition_validation():
    f = random_process(5, atoms=3, n=4)
    with pytest.raises(InputError):
        partition_interp_bound(f, [[0]] if f.n_atoms > 1 else [[]], 0.75, 2.0)
    with pytest.raises(DomainError):
        partition_interp_bound(f, [list(range(f.n_atoms))], 0.25, 2.0)
