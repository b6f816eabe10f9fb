import numpy as np
import pytest
from hypothesis import given, strategies as st

from jumpinterp.errors import DomainError, InputError
from jumpinterp.lorentz import AtomicMeasureSpace, jump_seminorm
from jumpinterp.martingale import (
    Filtration,
    FiniteMartingale,
    doob_check,
    dyadic_walk,
    hill_climb,
    lepingle_split,
    make_martingale,
    random_refinement,
    square_function,
    verify_lepingle,
)

seeds = st.integers(0, 10 ** 6)


def walk(seed, depth=None, steps="gauss", m=1):
    rng = np.random.default_rng(seed)
    depth = int(rng.integers(1, 5)) if depth is None else depth
    return dyadic_walk(depth, rng, m, steps)


def test_depth_one_frozen_values():
    m = dyadic_walk(1, np.random.default_rng(0), steps="sign")
    assert np.allclose(np.abs(m.values[1, :, 0]), 1.0)
    assert jump_seminorm(m.process, 2, 2, 2).value == pytest.approx(1.0)
    assert m.lp_norms(2).max() == pytest.approx(1.0)
    assert np.allclose(square_function(m, 2), 1.0)
    c = doob_check(m, 2)
    assert c.lhs == pytest.approx(1.0) and c.rhs == pytest.approx(2.0)


@given(seeds, st.sampled_from(["sign", "gauss"]), st.sampled_from([1, 2]))
def test_generators_produce_martingales(seed, steps, m):
    mart = walk(seed, steps=steps, m=m)
    assert mart.is_martingale()
    r = random_refinement(6, 3, np.random.default_rng(seed), m)
    assert r.is_martingale()


def test_filtration_must_refine():
    space = AtomicMeasureSpace.uniform(4)
    with pytest.raises(InputError):
        Filtration.from_blocks(space, [[[0, 1], [2, 3]], [[0, 2], [1, 3]]])
    with pytest.raises(InputError):
        Filtration.from_blocks(space, [[[0, 1], [1, 2, 3]]])


def test_not_a_martingale_is_detected():
    space = AtomicMeasureSpace.uniform(2)
    filt = Filtration.from_blocks(space, [[[0, 1]], [[0], [1]]])
    m = FiniteMartingale(filt, [[0.0, 0.0], [1.0, 2.0]])
    assert not m.is_martingale()
    assert make_martingale(filt, [1.0, 2.0]).is_martingale()


def test_roundtrip():
    m = walk(3, depth=3)
    back = FiniteMartingale.from_dict(m.to_dict())
    assert np.allclose(back.values, m.values)
    assert np.array_equal(back.filtration.labels, m.filtration.labels)


@given(seeds)
def test_split_certificates_at_every_breakpoint(seed):
    m = walk(seed)
    for lam in m.process.profile.global_breakpoints:
        sp = lepingle_split(m, float(lam), 2.0)
        c = sp.cert
        assert c["f0_ok"] and c["v1_ok"] and c["stopping_times_ok"]
        assert c["sampled_is_martingale"]
        assert np.allclose(sp.f0 + sp.f1, m.values)


def test_frozen_values_need_not_be_a_martingale():
    # the frozen construction can fail the martingale property; sampled never does
    found = False
    for seed in range(200):
        m = walk(seed, depth=3)
        for lam in m.process.profile.global_breakpoints[::3]:
            c = lepingle_split(m, float(lam), 2.0).cert
            assert c["sampled_is_martingale"]
            found |= not c["frozen_is_martingale"]
        if found:
            break
    assert found


def test_split_without_extras_matches():
    m = walk(11, depth=3)
    lam = float(m.process.profile.global_breakpoints[2])
    a, b = lepingle_split(m, lam, 2.0).cert, lepingle_split(m, lam, 2.0, extras=False).cert
    assert a["slack"] == b["slack"] and "stopping_times_ok" not in b


@given(seeds, st.sampled_from(["sign", "gauss"]))
def test_quantitative_lepingle(seed, steps):
    c = verify_lepingle(walk(seed, steps=steps), 2.0, 2.0, middle=False)
    assert c.params["quantitative"] and c.holds


def test_lepingle_with_middle_term_and_vector_data():
    c = verify_lepingle(walk(4, depth=3, m=2), 2.0, 2.0, middle=True)
    assert not c.params["quantitative"] and c.holds
    assert c.witness["middle"] > 0 and c.witness["middle_mode"] == "constructive"


def test_lepingle_domain():
    with pytest.raises(DomainError):
        verify_lepingle(walk(0), 1.0, 2.0)
    with pytest.raises(DomainError):
        verify_lepingle(walk(0), 2.0, 1.5)
    with pytest.raises(DomainError):
        doob_check(walk(0), 1.0)


@given(seeds, st.sampled_from([2.0, 4.0]))
def test_doob(seed, p):
    assert doob_check(walk(seed), p).holds


def test_hill_climb_does_not_decrease():
    m = walk(2, depth=3)
    obj = lambda mm: jump_seminorm(mm.process, 2, 2, 2).value / mm.lp_norms(2).max()
    best, v = hill_climb(m, obj, np.random.default_rng(0), iters=30)
    assert v >= obj(m) and best.is_martingale()
