"""Error metrics between a fitted model and a reference.

A reference is a :class:`StateSpaceModel`, a :class:`PoleResidueModel` or a
:class:`SampleSet`. Sample sets are only compared at their own points; no
values are extrapolated.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidParam, MissingDerivative, ZeroNorm
from .model import PoleResidueModel, SampleSet, eval_pole_residue
from .quadrature import (
    QuadGrid,
    discrete_h2_error_sq,
    h2_norm_sq_estimate,
    match_grid,
    samples_m_plus,
)
from .systems import StateSpaceModel, sample_system


class HinfEstimate(NamedTuple):
    value: float
    omega: float
    reference_peak: float

    @property
    def relative(self) -> float:
        if self.reference_peak == 0:
            raise ZeroNorm("reference has zero peak magnitude")
        return self.value / self.reference_peak


def _as_samples(reference, points, with_deriv=False) -> SampleSet:
    """Evaluate an oracle reference at `points` (noise-free)."""
    if isinstance(reference, SampleSet):
        return reference
    if isinstance(reference, StateSpaceModel):
        return sample_system(reference, points, with_deriv=with_deriv)
    if isinstance(reference, PoleResidueModel):
        pts = np.asarray(points, dtype=complex)
        return SampleSet(
            pts,
            eval_pole_residue(reference, pts),
            derivs=reference.derivative(pts) if with_deriv else None,
            m_plus=reference.moment(),
        )
    raise InvalidParam(f"unsupported reference type {type(reference).__name__}")


def _evaluator(reference):
    if isinstance(reference, StateSpaceModel):
        return reference
    if isinstance(reference, PoleResidueModel):
        return lambda s: eval_pole_residue(reference, s)
    raise InvalidParam(f"reference {type(reference).__name__} cannot be evaluated off its samples")


def relative_h2_error(reference, model: PoleResidueModel, grid: QuadGrid) -> float:
    """Quadrature-based relative H2 error ``||H - H_r|| / ||H||``.

    >>> ref = PoleResidueModel([-1.0], [1.0])
    >>> from vfkit.quadrature import bcc_grid
    >>> round(relative_h2_error(ref, PoleResidueModel([-1.0], [0.9]), bcc_grid(16, 1.0)), 12)
    0.1
    """
    samples = _as_samples(reference, grid.nodes)
    order = match_grid(samples, grid)
    mh = samples_m_plus(samples)
    den = h2_norm_sq_estimate(samples.values[order], mh, np.conj(mh), grid)
    if den == 0:
        raise ZeroNorm("reference has zero H2 norm estimate")
    return float(np.sqrt(discrete_h2_error_sq(samples, model, grid) / den))


def default_hinf_grid(w_lo: float, w_hi: float, n: int = 2000) -> np.ndarray:
    """``0`` followed by `n` log-spaced points over ``[w_lo/10, 10 w_hi]``."""
    if not 0 < w_lo < w_hi:
        raise InvalidParam(f"need 0 < w_lo < w_hi, got ({w_lo}, {w_hi})")
    return np.concatenate([[0.0], np.geomspace(w_lo / 10, 10 * w_hi, n)])


def reference_band(reference) -> tuple:
    if isinstance(reference, SampleSet):
        return reference.band()
    poles = reference.poles() if isinstance(reference, StateSpaceModel) else reference.poles
    mag = np.abs(poles)
    mag = mag[mag > 0]
    if mag.size == 0:
        return 1.0, 10.0
    lo, hi = float(mag.min()), float(mag.max())
    return (lo, hi) if lo < hi else (lo / 10, hi * 10)


def hinf_estimate(reference, model: PoleResidueModel, omegas=None) -> HinfEstimate:
    """Estimate ``sup_w |H(iw) - H_r(iw)|`` on a real frequency grid.

    The discrete maximum is refined by golden-section search on the grid
    interval around it. For a :class:`SampleSet` reference only the sample
    points are used and no refinement is attempted.
    """
    if isinstance(reference, SampleSet):
        err = np.abs(reference.values - eval_pole_residue(model, reference.points))
        k = int(np.argmax(err))
        return HinfEstimate(float(err[k]), float(reference.points[k].imag),
                            float(np.max(np.abs(reference.values))))
    if omegas is None:
        omegas = default_hinf_grid(*reference_band(reference))
    w = np.sort(np.asarray(omegas, dtype=float).ravel())
    if w.size < 2:
        raise InvalidParam("need at least two grid points")
    ref = _evaluator(reference)
    href = np.asarray(ref(1j * w))
    err = np.abs(href - eval_pole_residue(model, 1j * w))
    k = int(np.argmax(err))
    value, arg = float(err[k]), float(w[k])
    if 0 < k < w.size - 1 and err[k] > 0:
        def neg(x):
            s = 1j * x
            return -abs(complex(ref(s)) - eval_pole_residue(model, s))
        try:
            opt = minimize_scalar(neg, bracket=(w[k - 1], w[k], w[k + 1]), method="golden",
                                  options={"xtol": 1e-10})
            if w[k - 1] <= opt.x <= w[k + 1] and -opt.fun > value:
                value, arg = float(-opt.fun), float(opt.x)
        except ValueError:
            pass
    return HinfEstimate(value, arg, float(np.max(np.abs(href))))


def dense_relative_error(reference, model: PoleResidueModel, omegas) -> float:
    """``max |H - H_r| / max |H|`` over ``i * omegas``."""
    w = np.asarray(omegas, dtype=float).ravel()
    href = np.asarray(_evaluator(reference)(1j * w))
    peak = float(np.max(np.abs(href)))
    if peak == 0:
        raise ZeroNorm("reference vanishes on the grid")
    return float(np.max(np.abs(href - eval_pole_residue(model, 1j * w))) / peak)


def sobolev_error(reference, model: PoleResidueModel, grid: Optional[QuadGrid] = None,
                  W0=None, W1=None) -> float:
    """Discrete Sobolev error ``sqrt(sum w0^2 |dH|^2 + sum w1^2 |dH'|^2)``.

    Points are the grid nodes (oracle reference) or the sample points.
    Weights default to the grid weights, else to ones. ``H_r'`` is
    evaluated exactly.
    """
    if grid is None and not isinstance(reference, SampleSet):
        raise InvalidParam("an oracle reference needs a grid")
    points = grid.nodes if grid is not None else reference.points
    samples = _as_samples(reference, points, with_deriv=True)
    if samples.derivs is None:
        raise MissingDerivative("reference has no derivative data")
    if grid is not None:
        order = match_grid(samples, grid)
        pts, h, hp = samples.points[order], samples.values[order], samples.derivs[order]
        default_w = grid.weights
    else:
        pts, h, hp = samples.points, samples.values, samples.derivs
        default_w = np.ones(pts.size)
    w0 = default_w if W0 is None else np.broadcast_to(np.asarray(W0, dtype=float), pts.shape)
    w1 = default_w if W1 is None else np.broadcast_to(np.asarray(W1, dtype=float), pts.shape)
    e0 = h - eval_pole_residue(model, pts)
    e1 = hp - model.derivative(pts)
    return float(np.sqrt(np.sum(w0**2 * np.abs(e0) ** 2) + np.sum(w1**2 * np.abs(e1) ** 2)))


def relative_ls_residual(samples: SampleSet, model: PoleResidueModel) -> float:
    """``||W (h - H_r(xi))|| / ||W h||`` at the sample points."""
    w = samples.row_weights()
    h = samples.values
    den = float(np.linalg.norm(w * h))
    num = float(np.linalg.norm(w * (h - eval_pole_residue(model, samples.points))))
    if den == 0:
        raise ZeroNorm("samples are identically zero")
    return num / den

