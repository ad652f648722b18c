"""Rational model types, their evaluation, and conjugate-symmetry helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DenominatorZero,
    DuplicatePoles,
    InvalidParam,
    LengthMismatch,
    NotPairable,
    PoleCollision,
)

# relative guard used for every s - lambda subtraction
COLLISION_RTOL = 1e-13
# |denominator| below this is treated as a pole of the iterate
DENOM_ATOL = 1e-14


def _frozen(a, dtype=complex) -> np.ndarray:
    arr = np.array(a, dtype=dtype).ravel()
    arr.flags.writeable = False
    return arr


def cauchy_matrix(points, nodes) -> np.ndarray:
    """Return ``C[i, j] = 1 / (points[i] - nodes[j])``.

    Raises
    ------
    PoleCollision
        If some ``|points[i] - nodes[j]| < 1e-13 * (1 + |nodes[j]|)``.
    """
    points = np.asarray(points, dtype=complex).ravel()
    nodes = np.asarray(nodes, dtype=complex).ravel()
    diff = points[:, None] - nodes[None, :]
    guard = COLLISION_RTOL * (1.0 + np.abs(nodes))
    hit = np.abs(diff) < guard[None, :]
    if np.any(hit):
        i, j = np.argwhere(hit)[0]
        raise PoleCollision(
            f"point {points[i]!r} collides with node {nodes[j]!r}"
        )
    return 1.0 / diff


@dataclass(frozen=True)
class FrequencySample:
    """One measurement ``H(s)`` with optional derivative and noise level."""

    s: complex
    value: complex
    deriv: Optional[complex] = None
    sigma: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.s) and np.isfinite(self.value)):
            raise InvalidParam("sample point and value must be finite")
        if self.sigma is not None and not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidParam(f"sigma must be positive and finite, got {self.sigma}")


def conjugate_partners(points, tol: float) -> Optional[np.ndarray]:
    """Pair every point with a point at its conjugate.

    Greedy nearest-conjugate matching with ties broken by index order.
    Returns the partner index array, or ``None`` when some point has no
    unmatched partner within `tol` (absolute).
    """
    p = np.asarray(points, dtype=complex).ravel()
    partner = np.full(p.size, -1, dtype=int)
    for i in range(p.size):
        if partner[i] >= 0:
            continue
        d = np.abs(p - np.conj(p[i]))
        d[partner >= 0] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol:
            return None
        partner[i] = j
        partner[j] = i
    return partner


def check_conjugate_closed(points, tol: float = 0.0) -> bool:
    """True iff the multiset of conjugates equals the multiset of points."""
    if tol < 0:
        raise InvalidParam("tol must be nonnegative")
    return conjugate_partners(points, tol) is not None


@dataclass(frozen=True)
class SampleSet:
    """Ordered frequency-response samples.

    Stored column-wise: ``points``, ``values`` and optionally ``derivs`` and
    ``sigma`` are 1-D arrays of equal length. ``conjugate_closed`` is
    computed on construction.
    """

    points: np.ndarray
    values: np.ndarray
    derivs: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None
    m_plus: Optional[complex] = None
    conj_rtol: float = 1e-10
    conjugate_closed: bool = field(init=False)

    def __post_init__(self):
        pts = _frozen(self.points)
        vals = _frozen(self.values)
        if pts.size != vals.size:
            raise LengthMismatch("points and values differ in length")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(vals))):
            raise InvalidParam("sample points and values must be finite")
        if np.unique(pts).size != pts.size:
            raise InvalidParam("sample points must be distinct")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        if self.derivs is not None:
            der = _frozen(self.derivs)
            if der.size != pts.size:
                raise LengthMismatch("derivs and points differ in length")
            object.__setattr__(self, "derivs", der)
        if self.sigma is not None:
            sig = _frozen(self.sigma, dtype=float)
            if sig.size != pts.size:
                raise LengthMismatch("sigma and points differ in length")
            if not np.all(np.isfinite(sig) & (sig > 0)):
                raise InvalidParam("sigma must be positive and finite")
            object.__setattr__(self, "sigma", sig)
        if self.m_plus is not None:
            object.__setattr__(self, "m_plus", complex(self.m_plus))
        object.__setattr__(self, "conjugate_closed", self._check_closed())

    def _check_closed(self) -> bool:
        if self.points.size == 0:
            return True
        scale = max(1.0, float(np.max(np.abs(self.points))))
        partner = conjugate_partners(self.points, 1e-12 * scale)
        if partner is None:
            return False
        for arr in (self.values, self.derivs):
            if arr is None:
                continue
            vscale = max(float(np.max(np.abs(arr))), np.finfo(float).tiny)
            if np.max(np.abs(arr[partner] - np.conj(arr))) > self.conj_rtol * vscale:
                return False
        return True

    @classmethod
    def from_samples(cls, samples: Sequence[FrequencySample], m_plus=None) -> "SampleSet":
        samples = list(samples)
        derivs = [smp.deriv for smp in samples]
        sigmas = [smp.sigma for smp in samples]
        return cls(
            points=[smp.s for smp in samples],
            values=[smp.value for smp in samples],
            derivs=None if any(d is None for d in derivs) else derivs,
            sigma=None if any(v is None for v in sigmas) else sigmas,
            m_plus=m_plus,
        )

    @property
    def samples(self) -> list:
        return [
            FrequencySample(
                complex(s),
                complex(v),
                None if self.derivs is None else complex(self.derivs[i]),
                None if self.sigma is None else float(self.sigma[i]),
            )
            for i, (s, v) in enumerate(zip(self.points, self.values))
        ]

    @property
    def has_derivs(self) -> bool:
        return self.derivs is not None

    def __len__(self) -> int:
        return self.points.size

    def row_weights(self) -> np.ndarray:
        """Reciprocal noise levels, or ones when no sigma is stored."""
        if self.sigma is None:
            return np.ones(len(self))
        return 1.0 / self.sigma

    def band(self) -> tuple:
        """Smallest and largest nonzero ``|Im s|`` among the samples."""
        w = np.abs(self.points.imag)
        w = w[w > 0]
        if w.size == 0:
            w = np.abs(self.points)
            w = w[w > 0]
        if w.size == 0:
            raise InvalidParam("cannot infer a frequency band from the samples")
        return float(w.min()), float(w.max())


@dataclass(frozen=True)
class PoleResidueModel:
    """Strictly proper rational function ``sum_j residues[j] / (s - poles[j])``."""

    poles: np.ndarray
    residues: np.ndarray
    real_symmetric: bool = False

    def __post_init__(self):
        poles = _frozen(self.poles)
        residues = _frozen(self.residues)
        if poles.size != residues.size:
            raise LengthMismatch("poles and residues differ in length")
        if np.unique(poles).size != poles.size:
            raise DuplicatePoles("poles must be mutually distinct")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", residues)
        if self.real_symmetric and poles.size:
            scale = max(1.0, float(np.max(np.abs(poles))))
            partner = conjugate_partners(poles, 1e-8 * scale)
            if partner is None:
                raise NotPairable("real_symmetric model with unpaired poles")
            rscale = max(float(np.max(np.abs(residues))), 1.0)
            if np.max(np.abs(residues[partner] - np.conj(residues))) > 1e-8 * rscale:
                raise NotPairable("real_symmetric model with unpaired residues")

    @property
    def order(self) -> int:
        return self.poles.size

    def __call__(self, s):
        return eval_pole_residue(self, s)

    def derivative(self, s):
        """``H_r'(s) = -sum_j residues[j] / (s - poles[j])**2``."""
        scalar = np.ndim(s) == 0
        C = cauchy_matrix(np.atleast_1d(s), self.poles)
        out = -(C * C) @ self.residues
        return complex(out[0]) if scalar else out.reshape(np.shape(s))

    def moment(self) -> complex:
        """Limit of ``s * H_r(s)`` as ``|s| -> inf``, i.e. the residue sum."""
        return complex(np.sum(self.residues))


@dataclass(frozen=True)
class BarycentricState:
    """Barycentric iterate ``(sum phi/(s-lam)) / (1 + sum varphi/(s-lam))``."""

    lam: np.ndarray
    phi: np.ndarray
    varphi: np.ndarray

    def __post_init__(self):
        lam = _frozen(self.lam)
        phi = _frozen(self.phi)
        varphi = _frozen(self.varphi)
        if not (lam.size == phi.size == varphi.size):
            raise LengthMismatch("lam, phi and varphi must have equal length")
        if np.unique(lam).size != lam.size:
            raise DuplicatePoles("barycentric nodes must be mutually distinct")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "varphi", varphi)

    @property
    def order(self) -> int:
        return self.lam.size

    def denominator(self, s):
        scalar = np.ndim(s) == 0
        out = 1.0 + cauchy_matrix(np.atleast_1d(s), self.lam) @ self.varphi
        return complex(out[0]) if scalar else out.reshape(np.shape(s))


def eval_pole_residue(model: PoleResidueModel, s):
    """Evaluate a pole-residue model at a scalar or an array of points.

    Examples
    --------
    >>> m = PoleResidueModel(poles=[-1], residues=[1])
    >>> eval_pole_residue(m, 1j)
    (0.5-0.5j)
    """
    scalar = np.ndim(s) == 0
    out = cauchy_matrix(np.atleast_1d(s), model.poles) @ model.residues
    return complex(out[0]) if scalar else out.reshape(np.shape(s))


def eval_barycentric(state: BarycentricState, s):
    """Return ``(value, denom)`` of a barycentric iterate at `s`.

    Raises :class:`DenominatorZero` when ``|denom|`` is below ``1e-14``,
    i.e. `s` is (numerically) a pole of the iterate.
    """
    scalar = np.ndim(s) == 0
    C = cauchy_matrix(np.atleast_1d(s), state.lam)
    denom = 1.0 + C @ state.varphi
    if np.any(np.abs(denom) < DENOM_ATOL):
        raise DenominatorZero("evaluation point is a pole of the iterate")
    value = (C @ state.phi) / denom
    if scalar:
        return complex(value[0]), complex(denom[0])
    return value.reshape(np.shape(s)), denom.reshape(np.shape(s))


def realify_pairs(model: PoleResidueModel, tol: float) -> PoleResidueModel:
    """Force exact conjugate pairing of poles and residues.

    Each complex pole is matched greedily with the nearest unassigned pole
    at its conjugate and both members are replaced by the pair average.
    Poles without a partner whose imaginary part is at most `tol` are
    projected onto the real axis together with their residues.

    Raises
    ------
    NotPairable
        If a pole with ``|Im| > tol`` has no partner within `tol`.
    """
    lam = np.array(model.poles, dtype=complex)
    res = np.array(model.residues, dtype=complex)
    done = np.zeros(lam.size, dtype=bool)
    for i in range(lam.size):
        if done[i]:
            continue
        d = np.abs(lam - np.conj(lam[i]))
        d[done] = np.inf
        d[i] = np.inf
        j = int(np.argmin(d)) if lam.size > 1 else i
        has_partner = j != i and d[j] <= tol
        near_real = abs(lam[i].imag) <= tol
        if has_partner and not (near_real and abs(lam[j].imag) <= tol):
            p = 0.5 * (lam[i] + np.conj(lam[j]))
            q = 0.5 * (res[i] + np.conj(res[j]))
            lam[i], lam[j] = p, np.conj(p)
            res[i], res[j] = q, np.conj(q)
            done[i] = done[j] = True
        elif near_real:
            lam[i] = lam[i].real
            res[i] = res[i].real
            done[i] = True
        else:
            raise NotPairable(f"pole {lam[i]!r} has no conjugate partner within {tol}")
    return PoleResidueModel(lam, res, real_symmetric=True)
