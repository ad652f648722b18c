import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from vfkit.errors import InvalidParam, MissingDerivative, ZeroNorm
from vfkit.metrics import (
    default_hinf_grid,
    dense_relative_error,
    hinf_estimate,
    relative_h2_error,
    relative_ls_residual,
    sobolev_error,
)
from vfkit.model import PoleResidueModel, SampleSet
from vfkit.quadrature import bcc_grid
from vfkit.systems import StateSpaceModel, random_stable_siso

REF = PoleResidueModel([-1.0], [1.0])


def test_relative_h2_examples():
    g = bcc_grid(16, 1.0)
    assert relative_h2_error(REF, PoleResidueModel([-1.0], [0.9]), g) == pytest.approx(0.1, abs=1e-12)
    assert relative_h2_error(REF, REF, g) == 0
    ss = StateSpaceModel([[-1.0]], [[1.0]], [[1.0]])
    assert relative_h2_error(ss, PoleResidueModel([-1.0], [0.5]), g) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ZeroNorm):
        relative_h2_error(PoleResidueModel([-1.0], [0.0]), REF, g)


def test_relative_h2_against_adaptive_quadrature():
    ref = PoleResidueModel([-0.3 + 2j, -0.3 - 2j], [1 + 1j, 1 - 1j])
    model = PoleResidueModel([-0.4 + 2.1j, -0.4 - 2.1j], [1 + 0.9j, 1 - 0.9j])
    num, _ = quad(lambda w: abs(ref(1j * w) - model(1j * w)) ** 2, -np.inf, np.inf, limit=400)
    den, _ = quad(lambda w: abs(ref(1j * w)) ** 2, -np.inf, np.inf, limit=400)
    est = relative_h2_error(ref, model, bcc_grid(600, 2.0))
    assert est == pytest.approx(np.sqrt(num / den), rel=1e-7)


def test_hinf_examples():
    # |1/(iw+1) - 1/(iw+2)| = 1/|(iw+1)(iw+2)| peaks at w=0 with value 1/2
    est = hinf_estimate(REF, PoleResidueModel([-2.0], [1.0]), np.linspace(0, 10, 101))
    assert est.value == pytest.approx(0.5, rel=1e-15) and est.omega == 0
    assert est.reference_peak == 1 and est.relative == 0.5
    # resonant error peak lies between grid points and is refined
    ref = PoleResidueModel([-0.01 + 3j, -0.01 - 3j], [1.0, 1.0])
    zero = PoleResidueModel([-1.0], [0.0])
    est = hinf_estimate(ref, zero, np.linspace(0, 10, 37))
    w = np.linspace(2.99, 3.01, 200001)
    assert est.value == pytest.approx(np.max(np.abs(ref(1j * w))), rel=1e-8)
    with pytest.raises(InvalidParam):
        hinf_estimate(REF, REF, [1.0])


def test_hinf_sample_reference():
    pts = 1j * np.array([0.0, 1.0, 2.0])
    s = SampleSet(pts, REF(pts) + np.array([0, 0.1, 0]))
    est = hinf_estimate(s, REF)
    assert est.value == pytest.approx(0.1, abs=1e-15) and est.omega == 1.0


def test_default_hinf_grid():
    w = default_hinf_grid(1, 100, 50)
    assert w[0] == 0 and w.size == 51
    assert w[1] == pytest.approx(0.1) and w[-1] == pytest.approx(1000)
    with pytest.raises(InvalidParam):
        default_hinf_grid(10, 1)


def test_dense_and_ls_residual_examples():
    w = np.linspace(0, 5, 11)
    assert dense_relative_error(REF, PoleResidueModel([-1.0], [0.5]), w) == pytest.approx(0.5, rel=1e-15)
    s = SampleSet([0.0, 1j], [1.0, 1 / (1 + 1j)])
    assert relative_ls_residual(s, REF) == pytest.approx(0, abs=1e-16)
    assert relative_ls_residual(s, PoleResidueModel([-1.0], [2.0])) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ZeroNorm):
        relative_ls_residual(SampleSet([1j], [0.0]), REF)


def test_sobolev_error_examples():
    pts = 1j * np.array([0.0, 1.0])
    s = SampleSet(pts, REF(pts), derivs=REF.derivative(pts))
    assert sobolev_error(s, REF) == 0
    # model 2/(s+1): value error 1/(s+1), derivative error -1/(s+1)^2
    two = PoleResidueModel([-1.0], [2.0])
    expect = np.sqrt(np.sum(np.abs(1 / (pts + 1)) ** 2) + np.sum(np.abs(1 / (pts + 1) ** 2) ** 2))
    assert sobolev_error(s, two) == pytest.approx(expect, rel=1e-15)
    with pytest.raises(MissingDerivative):
        sobolev_error(SampleSet(pts, REF(pts)), two)
    with pytest.raises(InvalidParam):
        sobolev_error(REF, two)
    g = bcc_grid(5, 1.0)
    ss = StateSpaceModel([[-1.0]], [[1.0]], [[1.0]])
    assert sobolev_error(ss, REF, g) <= 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10))
def test_metric_homogeneity(seed, c):
    ss = random_stable_siso(4, seed, (1, 10))
    model = PoleResidueModel(ss.poles() * 1.05, np.ones(4))
    sc_ref = StateSpaceModel(ss.F, c * ss.B, ss.C)
    sc_model = PoleResidueModel(model.poles, c * model.residues)
    g = bcc_grid(64, 3.0)
    w = np.geomspace(0.1, 100, 200)
    assert relative_h2_error(sc_ref, sc_model, g) == pytest.approx(relative_h2_error(ss, model, g), rel=1e-10)
    assert hinf_estimate(sc_ref, sc_model, w).relative == pytest.approx(
        hinf_estimate(ss, model, w).relative, rel=1e-8)
    assert sobolev_error(sc_ref, sc_model, g) == pytest.approx(c * sobolev_error(ss, model, g), rel=1e-10)
