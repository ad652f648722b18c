import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vfkit.convergence import (
    StopDecision,
    TraceStep,
    check_matching_bound,
    detect_period,
    entrywise_change_bound,
    matching_distance,
    measured_entry_change,
    relative_change,
    stopping_decision,
)
from vfkit.errors import DivByZero, LengthMismatch


def _brute(a, b):
    return min(max(abs(a[j] - b[p[j]]) for j in range(len(a)))
               for p in itertools.permutations(range(len(a))))


def _step(max_abs_varphi, mu):
    z = np.zeros(1)
    return TraceStep(1, z, z, z, max_abs_varphi, mu, 0.0, 0.0, 0, 0.0)


def test_matching_distance_examples():
    assert matching_distance([-1, -2], [-2, -1])[0] == 0
    om, perm = matching_distance([-1, -2], [-2.1, -1.05])
    assert om == pytest.approx(0.1, abs=1e-15)
    assert list(perm) == [1, 0]
    om, _ = matching_distance([-1 + 1j, -1 - 1j], [-1.1 + 1j, -1.1 - 1j])
    assert om == pytest.approx(0.1, abs=1e-15)
    with pytest.raises(LengthMismatch):
        matching_distance([1, 2], [1])
    assert matching_distance([], [])[0] == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10_000))
def test_matching_distance_matches_brute_force(r, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(r) + 1j * rng.standard_normal(r)
    b = rng.standard_normal(r) + 1j * rng.standard_normal(r)
    om, perm = matching_distance(a, b)
    assert om == pytest.approx(_brute(a, b), abs=1e-15)
    assert sorted(perm) == list(range(r))
    assert om == pytest.approx(np.max(np.abs(a - b[perm])), abs=0)


@pytest.mark.parametrize("seed", range(5))
def test_bottleneck_branch_agrees_with_enumeration(seed, monkeypatch):
    import vfkit.convergence as conv

    rng = np.random.default_rng(seed)
    a = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    b = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    exact = matching_distance(a, b)[0]
    monkeypatch.setattr(conv, "ENUM_MAX_ORDER", 0)
    om, perm = conv.matching_distance(a, b)
    assert om == exact
    assert sorted(perm) == list(range(7))


def test_bottleneck_large_sets():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    shift = rng.permutation(30)
    b = a[shift] + 1e-3 * (rng.standard_normal(30) + 1j * rng.standard_normal(30))
    om, perm = matching_distance(a, b)
    assert om <= np.max(np.abs(a - b[np.argsort(shift)]))
    assert om == pytest.approx(np.max(np.abs(a - b[perm])), abs=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 10_000))
def test_matching_distance_is_a_metric(r, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal(r) + 1j * rng.standard_normal(r) for _ in range(3))
    ab, ba = matching_distance(a, b)[0], matching_distance(b, a)[0]
    assert abs(ab - ba) <= 1e-12
    assert matching_distance(a, a)[0] == 0
    assert ab <= matching_distance(a, c)[0] + matching_distance(c, b)[0] + 1e-12


def test_check_matching_bound():
    assert check_matching_bound(0.05, 2, 0.01)
    assert not check_matching_bound(0.07, 2, 0.01)
    assert check_matching_bound(0.0, 3, 0.0)


def test_stopping_decision():
    assert stopping_decision(_step(0.0, 1.0), 1e-10, 3) is StopDecision.CONVERGED_BACKWARD
    assert stopping_decision(_step(1e-12, 1.0), 1e-10, 10) is StopDecision.CONVERGED_BACKWARD
    assert stopping_decision(_step(1e-12, 1e-3), 1e-10, 10) is StopDecision.CONTINUE


def test_entrywise_change_bound():
    assert entrywise_change_bound(0.0, 1.0) == 0
    assert entrywise_change_bound(0.1, 2.0) == pytest.approx(0.05)
    with pytest.raises(DivByZero):
        entrywise_change_bound(0.1, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10_000))
def test_measured_entry_change_below_bound(r, seed):
    rng = np.random.default_rng(seed)
    xi = 1j * rng.uniform(-10, 10, 15)
    old = -rng.uniform(0.1, 2, r) + 1j * rng.uniform(-10, 10, r)
    new = old + 0.05 * (rng.standard_normal(r) + 1j * rng.standard_normal(r))
    new = new[rng.permutation(r)]
    om = matching_distance(old, new)[0]
    mu = np.min(np.abs(xi[:, None] - old[None, :]))
    # direct comparison of the two Cauchy matrices, columns matched
    _, perm = matching_distance(old, new)
    C_old = 1 / (xi[:, None] - old[None, :])
    C_new = 1 / (xi[:, None] - new[perm][None, :])
    direct = np.max(np.abs((C_old - C_new) / C_new))
    assert measured_entry_change(xi, old, new) == pytest.approx(direct, rel=1e-9)
    assert direct <= entrywise_change_bound(om, mu) + 1e-12


def test_relative_change():
    assert relative_change([-1, -2], [-2, -1]) == 0
    assert relative_change([-2.0], [-1.0]) == pytest.approx(0.5)


def test_detect_period_examples():
    seq = [5, 2.02, 3.41, 2.02, 3.41, 2.02, 3.41]
    assert detect_period(seq, 6) == 2
    assert detect_period([0.3] * 10, 6) == 1
    assert detect_period(0.5 ** np.arange(30), 20) is None
    assert detect_period([1, 2, 3], 6) is None


def test_detect_period_minimal():
    seq = [1.0, 2.0] * 10
    assert detect_period(seq, 20) == 2
    seq = [1.0, 2.0, 3.0] * 8
    assert detect_period(seq, 18) == 3
    seq = [1.0, 2.0, 1.0, 3.0] * 6
    assert detect_period(seq, 16) == 4


def test_detect_period_tolerance():
    seq = np.array([2.02, 3.41] * 10) + 1e-11 * np.arange(20)
    assert detect_period(seq, 20, 1e-8) == 2
    assert detect_period(seq, 20, 1e-13) is None
