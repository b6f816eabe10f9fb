import numpy as np
import pytest
from hypothesis import given, strategies as st

from jumpinterp.errors import DomainError, InputError
from jumpinterp.markov import (
    DoublyStochasticMatrix,
    contraction_check,
    random_doubly_stochastic,
    semigroup_orbit,
    verify_markov_jump,
)

seeds = st.integers(0, 10 ** 6)


def test_averaging_matrix_frozen():
    Q = DoublyStochasticMatrix([[0.5, 0.5], [0.5, 0.5]])
    c = verify_markov_jump(Q, [1.0, -1.0], N=8)
    assert c.lhs == pytest.approx(1.0) and c.rhs == pytest.approx(1.0)


def test_permutation_orbit_is_constant():
    Q = DoublyStochasticMatrix([[0, 1], [1, 0]])
    orb = semigroup_orbit(Q, [3.0, -1.0], N=5)
    assert np.allclose(orb.values[:, :, 0], [[3.0] * 6, [-1.0] * 6])
    assert verify_markov_jump(Q, [3.0, -1.0], N=5).lhs == 0.0


def test_orbit_steps_subset_matches_full():
    Q = random_doubly_stochastic(5, seed=1)
    f = np.arange(5.0)
    full = semigroup_orbit(Q, f, N=10)
    sub = semigroup_orbit(Q, f, steps=[0, 3, 10])
    assert np.allclose(sub.values, full.values[:, [0, 3, 10]])


@given(seeds, st.sampled_from(["birkhoff", "sinkhorn"]), st.integers(1, 12))
def test_random_matrices_are_doubly_stochastic(seed, method, n):
    Q = random_doubly_stochastic(n, method, seed=seed)
    assert np.allclose(Q.matrix.sum(axis=0), 1) and np.allclose(Q.matrix.sum(axis=1), 1)
    c = contraction_check(Q, np.random.default_rng(seed).normal(size=n))
    assert all(c.values())


@given(seeds, st.sampled_from([4, 8, 16]))
def test_orbit_energy_nonincreasing(seed, n):
    # <(Q*)^k Q^k f, f> = ||Q^k f||^2 decreases (the orbit norm itself need not)
    rng = np.random.default_rng(seed)
    Q = random_doubly_stochastic(n, rng=rng)
    f = rng.normal(size=n)
    orb = semigroup_orbit(Q, f, N=20)
    energy = np.sum(orb.space.weights[:, None] * orb.values[:, :, 0] * f[:, None], axis=0)
    assert np.all(np.diff(energy) <= 1e-12 * energy[0])


@given(seeds)
def test_ratio_finite(seed):
    rng = np.random.default_rng(seed)
    Q = random_doubly_stochastic(6, rng=rng)
    assert verify_markov_jump(Q, rng.normal(size=6), N=16).holds


def test_validation():
    with pytest.raises(InputError):
        DoublyStochasticMatrix([[0.5, 0.6], [0.5, 0.4]])
    with pytest.raises(InputError):
        DoublyStochasticMatrix([[1.0, 0.0]])
    with pytest.raises(InputError):
        semigroup_orbit(DoublyStochasticMatrix(np.eye(2)), [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        verify_markov_jump(DoublyStochasticMatrix(np.eye(2)), [1.0, 2.0], p=1.0)
    with pytest.raises(DomainError):
        random_doubly_stochastic(3, "nope", seed=0)


def test_weighted_adjoint():
    w = np.array([0.25, 0.75])
    Q = DoublyStochasticMatrix([[0.4, 0.6], [0.2, 0.8]], weights=w)
    # <Q f, g>_w = <f, Q* g>_w
    f, g = np.array([1.0, 2.0]), np.array([-1.0, 3.0])
    assert np.dot(w * (Q.matrix @ f), g) == pytest.approx(np.dot(w * f, Q.adjoint @ g))
