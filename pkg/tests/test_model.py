import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vfkit import io
from vfkit.errors import (
    DenominatorZero,
    DuplicatePoles,
    InvalidParam,
    LengthMismatch,
    NotPairable,
    PoleCollision,
)
from vfkit.model import (
    BarycentricState,
    FrequencySample,
    PoleResidueModel,
    SampleSet,
    check_conjugate_closed,
    eval_barycentric,
    eval_pole_residue,
    realify_pairs,
)
from vfkit.quadrature import bcc_grid
from vfkit.systems import random_stable_siso


def test_eval_pole_residue_examples():
    assert eval_pole_residue(PoleResidueModel([-1], [1]), 0) == 1
    assert eval_pole_residue(PoleResidueModel([-1], [1]), 1j) == pytest.approx(0.5 - 0.5j, abs=1e-15)
    assert eval_pole_residue(PoleResidueModel([-1, -2], [1, -1]), 0) == pytest.approx(0.5, abs=1e-15)


def test_eval_pole_residue_vectorized_and_collision():
    m = PoleResidueModel([-1, -2], [1, -1])
    s = np.array([0, 1j, -1j])
    np.testing.assert_allclose(m(s), [m(z) for z in s], rtol=0, atol=0)
    with pytest.raises(PoleCollision):
        m(-1.0)
    with pytest.raises(PoleCollision):
        m(-2.0 + 1e-14)


def test_eval_barycentric_examples():
    assert eval_barycentric(BarycentricState([-1], [1], [0]), 0) == (1, 1)
    v, d = eval_barycentric(BarycentricState([-1], [1], [0.5]), 0)
    assert v == pytest.approx(2 / 3, rel=1e-15) and d == pytest.approx(1.5, rel=1e-15)
    v, d = eval_barycentric(BarycentricState([-1, -3], [0, 0], [1, 1]), 0)
    assert v == 0 and d == pytest.approx(7 / 3, rel=1e-15)


def test_eval_barycentric_errors():
    st_ = BarycentricState([-1], [1], [-1])
    with pytest.raises(DenominatorZero):
        eval_barycentric(st_, 0)  # 1 - 1/(0+1) = 0
    with pytest.raises(PoleCollision):
        eval_barycentric(st_, -1)


def test_check_conjugate_closed_examples():
    assert check_conjugate_closed([1j, -1j])
    assert check_conjugate_closed([-1])
    assert not check_conjugate_closed([1j])
    assert check_conjugate_closed([1j, 1j, -1j, -1j])
    assert not check_conjugate_closed([1j, 1j, -1j])
    assert check_conjugate_closed([1 + 1e-9j, 1 - 1.1e-9j], tol=1e-9)
    with pytest.raises(InvalidParam):
        check_conjugate_closed([1j], tol=-1)


def test_realify_examples():
    m = PoleResidueModel([-1 + 1j, -1 - 1j], [1 + 0.1j, 1 - 0.1j])
    out = realify_pairs(m, 1e-8)
    np.testing.assert_array_equal(out.poles, m.poles)
    np.testing.assert_array_equal(out.residues, m.residues)

    out = realify_pairs(PoleResidueModel([-1 + 1e-14], [2 + 1e-15j]), 1e-10)
    assert out.poles[0] == -1 + 1e-14
    assert out.residues[0] == 2 and out.residues[0].imag == 0

    out = realify_pairs(PoleResidueModel([-1 + 1j, -1.000001 - 1j], [1, 1]), 1e-5)
    assert out.poles[0] == pytest.approx(-1.0000005 + 1j, abs=1e-15)
    assert out.poles[1] == np.conj(out.poles[0])
    assert out.real_symmetric


def test_realify_not_pairable():
    with pytest.raises(NotPairable):
        realify_pairs(PoleResidueModel([-1 + 1j], [1]), 1e-8)


def test_realify_real_on_real_axis():
    m = PoleResidueModel([-1 + 2j, -1 - 2j + 1e-9, -3 + 1e-13j], [1 + 1j, 1 - 1j + 1e-9, 2 + 1e-12j])
    out = realify_pairs(m, 1e-6)
    for x in (0.0, 0.5, 3.0):
        assert out(x).imag == 0 or abs(out(x).imag) < 1e-15 * abs(out(x))


def test_model_invariants():
    with pytest.raises(DuplicatePoles):
        PoleResidueModel([-1, -1], [1, 2])
    with pytest.raises(LengthMismatch):
        PoleResidueModel([-1], [1, 2])
    with pytest.raises(NotPairable):
        PoleResidueModel([-1 + 1j], [1], real_symmetric=True)
    with pytest.raises(DuplicatePoles):
        BarycentricState([-1, -1], [0, 0], [0, 0])
    m = PoleResidueModel([-1], [1])
    with pytest.raises(ValueError):
        m.poles[0] = 3


def test_sample_invariants():
    with pytest.raises(InvalidParam):
        FrequencySample(1j, 1.0, sigma=0.0)
    with pytest.raises(InvalidParam):
        FrequencySample(complex("nan"), 1.0)
    with pytest.raises(InvalidParam):
        SampleSet([1j, 1j], [1, 2])
    with pytest.raises(InvalidParam):
        SampleSet([1j], [1], sigma=[-1.0])
    s = SampleSet([1j, -1j], [1 + 1j, 1 - 1j])
    assert s.conjugate_closed
    assert not SampleSet([1j, -1j], [1 + 1j, 1 + 1j]).conjugate_closed
    assert not SampleSet([1j], [1]).conjugate_closed


def test_derivative():
    m = PoleResidueModel([-1 + 2j, -3], [1 - 1j, 2])
    s, h = 0.3 + 0.7j, 1e-6
    fd = (m(s + h) - m(s - h)) / (2 * h)
    assert abs(m.derivative(s) - fd) < 1e-8 * abs(fd)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10_000), st.floats(0.01, 1e3))
def test_real_symmetric_conjugate_property(n, seed, omega):
    rng = np.random.default_rng(seed)
    poles, res = [], []
    for _ in range(n // 2):
        p = complex(-rng.uniform(0.1, 2), rng.uniform(0.1, 10))
        q = complex(*rng.standard_normal(2))
        poles += [p, np.conj(p)]
        res += [q, np.conj(q)]
    if n % 2:
        poles.append(-rng.uniform(0.1, 5))
        res.append(rng.standard_normal())
    m = PoleResidueModel(poles, res, real_symmetric=True)
    a, b = m(1j * omega), m(-1j * omega)
    assert abs(a - np.conj(b)) <= 1e-12 * max(abs(a), 1e-300)
    assert abs(a.imag + b.imag) <= 1e-12 * max(abs(a), 1e-300)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(0, 10_000))
def test_barycentric_with_zero_varphi_is_pole_residue(r, seed):
    rng = np.random.default_rng(seed)
    lam = -rng.uniform(0.1, 3, r) + 1j * rng.uniform(-10, 10, r)
    phi = rng.standard_normal(r) + 1j * rng.standard_normal(r)
    s = 1j * rng.uniform(-20, 20, 25)
    v, d = eval_barycentric(BarycentricState(lam, phi, np.zeros(r)), s)
    ref = eval_pole_residue(PoleResidueModel(lam, phi), s)
    np.testing.assert_array_equal(d, 1)
    assert np.max(np.abs(v - ref) / np.abs(ref)) <= 1e-14


def _bit_equal(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and a.tobytes() == b.tobytes()


def _roundtrip(d):
    return json.loads(json.dumps(d))


def test_json_roundtrip_bit_exact():
    rng = np.random.default_rng(3)
    z = rng.standard_normal(6) + 1j * rng.standard_normal(6)

    m = PoleResidueModel(-np.abs(z.real) + 1j * z.imag, z[::-1])
    m2 = io.model_from_dict(_roundtrip(io.model_to_dict(m)))
    assert _bit_equal(m.poles, m2.poles) and _bit_equal(m.residues, m2.residues)
    assert m2.real_symmetric == m.real_symmetric

    b = BarycentricState(z, z * 3, z / 7)
    b2 = io.barycentric_from_dict(_roundtrip(io.barycentric_to_dict(b)))
    for f in ("lam", "phi", "varphi"):
        assert _bit_equal(getattr(b, f), getattr(b2, f))

    fs = FrequencySample(z[0], z[1], z[2], 0.1)
    assert io.sample_from_dict(_roundtrip(io.sample_to_dict(fs))) == fs

    pts = np.concatenate([1j * np.geomspace(0.1, 10, 5), -1j * np.geomspace(0.1, 10, 5)])
    vals = 1 / (pts + np.pi)
    ss = SampleSet(pts, vals, derivs=-vals**2, sigma=np.full(10, 1 / 3), m_plus=1 / 7)
    ss2 = io.sampleset_from_dict(_roundtrip(io.sampleset_to_dict(ss)))
    for f in ("points", "values", "derivs", "sigma"):
        assert _bit_equal(getattr(ss, f), getattr(ss2, f))
    assert ss2.m_plus == ss.m_plus and ss2.conjugate_closed == ss.conjugate_closed

    sys_ = random_stable_siso(5, 2, (1, 10))
    sys2 = io.statespace_from_dict(_roundtrip(io.statespace_to_dict(sys_)))
    for f in ("F", "B", "C"):
        assert _bit_equal(getattr(sys_, f), getattr(sys2, f))

    g = bcc_grid(9, 0.37)
    g2 = io.grid_from_dict(_roundtrip(io.grid_to_dict(g)))
    assert _bit_equal(g.nodes, g2.nodes) and _bit_equal(g.weights, g2.weights)
    assert (g2.rho_plus, g2.L, g2.ell) == (g.rho_plus, g.L, g.ell)


def test_model_json_layout(tmp_path):
    m = PoleResidueModel([-1 + 2j, -1 - 2j], [0.5j, -0.5j], real_symmetric=True)
    path = tmp_path / "m.json"
    io.save_model(path, m)
    d = json.loads(path.read_text())
    assert d == {
        "order": 2,
        "poles": [{"re": -1.0, "im": 2.0}, {"re": -1.0, "im": -2.0}],
        "residues": [{"re": 0.0, "im": 0.5}, {"re": 0.0, "im": -0.5}],
        "real_symmetric": True,
    }
    assert io.load_model(path).order == 2


def test_sample_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    pts = 1j * np.sort(rng.uniform(0, 100, 7))
    vals = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    for kw in ({}, {"derivs": vals * 1.5}, {"sigma": rng.uniform(0.1, 1, 7)},
               {"derivs": vals / 3, "sigma": rng.uniform(0.1, 1, 7), "m_plus": 0.3 - 0.1j}):
        s = SampleSet(pts, vals, **kw)
        path = tmp_path / "s.csv"
        for side in tmp_path.glob("*.json"):
            side.unlink()
        io.write_samples_csv(path, s)
        s2 = io.read_samples_csv(path)
        for f in ("points", "values", "derivs", "sigma"):
            a, b = getattr(s, f), getattr(s2, f)
            assert (a is None and b is None) or _bit_equal(a, b)
        assert s2.m_plus == s.m_plus


def test_sample_csv_rejects_bad_input(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("s_re,s_im,h_re\n0,1,2\n")
    with pytest.raises(InvalidParam):
        io.read_samples_csv(p)
    p.write_text("s_re,s_im,h_re,h_im\n0,1,2,abc\n")
    with pytest.raises(InvalidParam):
        io.read_samples_csv(p)
    p.write_text("s_re,s_im,h_re,h_im\n0,1,2\n")
    with pytest.raises(InvalidParam):
        io.read_samples_csv(p)
