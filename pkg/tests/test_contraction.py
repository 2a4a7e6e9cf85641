import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persistent_adjoint.contraction import (
    NonConvergenceError,
    StepMap,
    banach_tail_bound,
    deep_solve,
    iterate_to_tolerance,
    measure_contraction_ratio,
)
from persistent_adjoint.models import CrnSystem
from persistent_adjoint.models.nn import nn_step
from persistent_adjoint.norms import MAX

HALF = StepMap(lambda z, w: 0.5 * z, MAX, declared_beta=0.5)


def const(k):
    return StepMap(lambda z, w: np.full_like(np.asarray(z, dtype=float), k), MAX)


def test_constant_map_threshold_zero():
    r = iterate_to_tolerance(const(3.0), np.array([0.0]), None, 0.0)
    assert r.final_state[0] == 3.0 and r.steps_taken == 2 and r.last_increment_norm == 0
    r = iterate_to_tolerance(const(3.0), np.array([3.0]), None, 0.0)
    assert r.steps_taken == 1


def test_halving_map_examples():
    r = iterate_to_tolerance(HALF, np.array([1.0]), None, 0.25)
    assert r.final_state[0] == 0.25 and r.steps_taken == 2
    # the first increment is 0.5, so a single step is accepted only for thresholds >= 0.5
    r = iterate_to_tolerance(HALF, np.array([1.0]), None, 0.3)
    assert r.final_state[0] == 0.25 and r.steps_taken == 2
    r = iterate_to_tolerance(HALF, np.array([1.0]), None, 0.5)
    assert r.final_state[0] == 0.5 and r.steps_taken == 1


def test_last_increment_within_threshold():
    r = iterate_to_tolerance(HALF, np.array([1.0, -4.0]), None, 1e-3)
    assert r.last_increment_norm <= 1e-3


def test_invalid_arguments():
    with pytest.raises(ValueError):
        iterate_to_tolerance(HALF, np.ones(1), None, -1.0)
    with pytest.raises(ValueError):
        iterate_to_tolerance(HALF, np.ones(1), None, 1.0, max_steps=0)
    with pytest.raises(ValueError):
        deep_solve(HALF, np.ones(1), None, 0.0)


def test_nonconvergence_carries_increment():
    grow = StepMap(lambda z, w: 2.0 * z, MAX)
    with pytest.raises(NonConvergenceError) as info:
        iterate_to_tolerance(grow, np.ones(1), None, 1e-6, max_steps=5)
    assert info.value.last_increment_norm == 16.0
    assert info.value.steps == 5


def test_nonfinite_increment_stops_early():
    blow = StepMap(lambda z, w: z * 1e200, MAX)
    with np.errstate(over="ignore"), pytest.raises(NonConvergenceError) as info:
        iterate_to_tolerance(blow, np.ones(1), None, 1.0, max_steps=100)
    assert not np.isfinite(info.value.last_increment_norm)
    assert info.value.steps < 100


def test_resolution_floor_accepts_roundoff_cycle():
    # a map that alternates between two neighbouring floats never has a zero increment
    x0 = 1.0
    x1 = np.nextafter(x0, 2.0)
    flip = StepMap(lambda z, w: np.where(z == x0, x1, x0), MAX)
    with pytest.raises(NonConvergenceError):
        iterate_to_tolerance(flip, np.array([x0]), None, 0.0, max_steps=50)
    r = iterate_to_tolerance(flip, np.array([x0]), None, 0.0, max_steps=50, resolution=1e-14)
    assert r.steps_taken == 1


def test_banach_examples():
    assert banach_tail_bound(0.5, 0.1) == pytest.approx(0.1)
    assert banach_tail_bound(0.9, 1.0) == pytest.approx(9.0)
    assert banach_tail_bound(0.3, 0.0) == 0.0
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            banach_tail_bound(bad, 1.0)


def test_deep_solve_examples():
    z = deep_solve(HALF, np.array([1.0]), None, 1e-12)
    assert abs(z[0]) <= 2e-12
    z = deep_solve(const(7.0), np.array([0.0]), None, 1e-12, max_steps=2)
    assert z[0] == 7.0
    crn = CrnSystem(np.array([[3.0]]))
    z = deep_solve(crn.step_map(), np.array([-1.0]), crn.params(np.zeros((1, 1))), 1e-12, max_steps=2)
    assert z[0] == 3.0


def test_deep_solve_relative_tolerance():
    # fixed point 2e-20: an absolute 1e-13 test stops far from it, a relative one does not
    T = StepMap(lambda z, w: 0.5 * z + 1e-20, MAX)
    z_abs = deep_solve(T, np.array([1.0]), None, 1e-13)
    z_rel = deep_solve(T, np.array([1.0]), None, 1e-13, relative=True)
    assert abs(z_abs[0] - 2e-20) > 1e-15
    assert abs(z_rel[0] - 2e-20) <= 1e-13 * 2e-20 * 2


def test_measure_ratio_examples():
    rng = np.random.default_rng(1)
    pairs = [(rng.standard_normal(3), rng.standard_normal(3)) for _ in range(20)]
    assert measure_contraction_ratio(HALF, None, pairs) == pytest.approx(0.5)
    assert measure_contraction_ratio(const(1.0), None, pairs) == 0.0
    u = rng.standard_normal(4)
    nn0 = StepMap(lambda x, w: nn_step(x, w, u), MAX)
    assert measure_contraction_ratio(nn0, np.zeros((4, 4)), [(rng.standard_normal(4), rng.standard_normal(4)) for _ in range(10)]) == 0.0


def test_measure_ratio_identical_pairs():
    a = np.ones(2)
    assert measure_contraction_ratio(HALF, None, [(a, a), (a, 2 * a)]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        measure_contraction_ratio(HALF, None, [(a, a)])


def _random_linear_contraction(rng, d, beta_max=0.9):
    a = rng.standard_normal((d, d))
    beta = rng.uniform(0.1, beta_max)
    a *= beta / np.abs(a).sum(axis=1).max()
    c = rng.standard_normal(d)
    return StepMap(lambda z, w: a @ z + c, MAX), beta


def test_banach_bound_holds_random():
    rng = np.random.default_rng(2)
    for _ in range(100):
        d = int(rng.integers(1, 6))
        T, beta = _random_linear_contraction(rng, d)
        pairs = [(rng.standard_normal(d), rng.standard_normal(d)) for _ in range(20)]
        assert measure_contraction_ratio(T, None, pairs) <= beta + 1e-12
        z0 = rng.standard_normal(d) * 5
        r = iterate_to_tolerance(T, z0, None, rng.uniform(1e-6, 1e-1))
        z_star = deep_solve(T, z0, None, 1e-14)
        err = np.max(np.abs(r.final_state - z_star))
        assert err <= banach_tail_bound(beta, r.last_increment_norm) + 1e-12


@settings(max_examples=100)
@given(t1=st.floats(1e-9, 1.0), t2=st.floats(1e-9, 1.0), seed=st.integers(0, 2**32 - 1))
def test_threshold_monotone(t1, t2, seed):
    t1, t2 = max(t1, t2), min(t1, t2)
    rng = np.random.default_rng(seed)
    T, _ = _random_linear_contraction(rng, 3)
    z0 = rng.standard_normal(3)
    assert iterate_to_tolerance(T, z0, None, t1).steps_taken <= iterate_to_tolerance(T, z0, None, t2).steps_taken


@settings(max_examples=100)
@given(seed=st.integers(0, 2**32 - 1))
def test_deep_solve_start_invariance(seed):
    rng = np.random.default_rng(seed)
    T, beta = _random_linear_contraction(rng, 4, beta_max=0.5)
    tol = 1e-10
    za = deep_solve(T, rng.standard_normal(4) * 10, None, tol)
    zb = deep_solve(T, rng.standard_normal(4) * 10, None, tol)
    assert np.max(np.abs(za - zb)) <= 2 * tol
