"""Boyd/Clenshaw-Curtis grids on the imaginary axis and H2 estimates.

The rule maps ``omega = L cot(t)`` onto ``t in (0, pi)`` and applies the
rectangle rule in ``t``. Absolute norms follow the convention
``||H||^2 = int |H(i w)|^2 dw`` (no ``1/(2 pi)`` factor); relative errors
are convention-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySet, GridMismatch, InvalidParam, LengthMismatch
from .model import PoleResidueModel, SampleSet, eval_pole_residue


@dataclass(frozen=True)
class QuadGrid:
    """Nodes ``i L cot(j pi/(ell+1))``, weights and endpoint weight ``rho_plus``."""

    nodes: np.ndarray
    weights: np.ndarray
    rho_plus: float
    L: float
    ell: int

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=complex).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if nodes.size != self.ell or weights.size != self.ell:
            raise LengthMismatch("grid nodes/weights must have ell entries")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)


def bcc_grid(ell: int, L: float) -> QuadGrid:
    """Build the ``ell``-node Boyd/Clenshaw-Curtis grid with scale `L`.

    Nodes are ordered from the largest positive frequency downwards. The
    lower half is computed and the upper half mirrored, so nodes are exact
    conjugates of each other and weights are exactly symmetric; for odd
    `ell` the middle node is exactly 0.

    Examples
    --------
    >>> g = bcc_grid(3, 1.0)
    >>> g.nodes
    array([ 0.+1.j,  0.+0.j, -0.-1.j])
    """
    if int(ell) != ell or ell < 1:
        raise InvalidParam(f"ell must be a positive integer, got {ell}")
    ell = int(ell)
    L = float(L)
    if not (L > 0 and np.isfinite(L)):
        raise InvalidParam(f"L must be positive and finite, got {L}")

    half = ell // 2
    t = np.arange(1, half + 1) * np.pi / (ell + 1)
    w_half = L / np.tan(t)
    rho_half = np.sqrt(L * np.pi / (ell + 1)) / np.sin(t)
    mid_w = np.zeros(ell % 2)
    mid_rho = np.full(ell % 2, np.sqrt(L * np.pi / (ell + 1)))
    omega = np.concatenate([w_half, mid_w, -w_half[::-1]])
    weights = np.concatenate([rho_half, mid_rho, rho_half[::-1]])
    rho_plus = float(np.sqrt(np.pi / (L * (ell + 1))))
    return QuadGrid(1j * omega, weights, rho_plus, L, ell)


def h2_norm_sq_estimate(values, m_plus: complex, m_minus=None, grid: QuadGrid = None) -> float:
    """Quadrature estimate of ``int |H(i w)|^2 dw``.

    ``sum_j rho_j^2 |H_j|^2 + (rho_plus^2 / 2) (|M+|^2 + |M-|^2)``. The two
    endpoint terms share the single ``t = 0 ~ t = pi`` endpoint of the
    periodic rectangle rule, hence the halving. `m_minus` defaults to
    ``conj(m_plus)``, which is exact for real systems.

    >>> g = bcc_grid(5, 1.0)
    >>> abs(h2_norm_sq_estimate(1 / (g.nodes + 1), 1, 1, g) - np.pi) < 1e-12
    True
    """
    if grid is None:
        raise InvalidParam("a quadrature grid is required")
    values = np.asarray(values, dtype=complex).ravel()
    if values.size != grid.ell:
        raise LengthMismatch(f"expected {grid.ell} values, got {values.size}")
    if m_minus is None:
        m_minus = np.conj(m_plus)
    body = float(np.sum(grid.weights**2 * np.abs(values) ** 2))
    ends = 0.5 * grid.rho_plus**2 * (abs(m_plus) ** 2 + abs(m_minus) ** 2)
    return body + ends


def m_plus_estimate(samples: SampleSet) -> complex:
    """Finite-frequency surrogate ``s H(s)`` at the sample of largest ``|s|``.

    Ties in ``|s|`` prefer the sample in the upper half-plane.
    """
    s = samples.points
    ok = np.abs(s.imag) > 0
    if not np.any(ok):
        raise EmptySet("no sample off the real axis to estimate M+ from")
    idx = np.flatnonzero(ok)
    key = np.abs(s[idx])
    top = idx[key == key.max()]
    upper = top[s[top].imag > 0]
    k = int(upper[0] if upper.size else top[0])
    return complex(s[k] * samples.values[k])


def match_grid(samples: SampleSet, grid: QuadGrid) -> np.ndarray:
    """Return sample indices ordered like the grid nodes.

    Raises :class:`GridMismatch` unless the sample points and the nodes
    coincide one-to-one within ``1e-12 * L``.
    """
    if len(samples) != grid.ell:
        raise GridMismatch(f"{len(samples)} samples for a {grid.ell}-node grid")
    tol = 1e-12 * grid.L
    order = np.empty(grid.ell, dtype=int)
    used = np.zeros(grid.ell, dtype=bool)
    pts = samples.points
    for j, node in enumerate(grid.nodes):
        d = np.abs(pts - node)
        d[used] = np.inf
        i = int(np.argmin(d))
        if d[i] > tol:
            raise GridMismatch(f"no sample at grid node {node!r}")
        order[j] = i
        used[i] = True
    return order


def samples_m_plus(samples: SampleSet) -> complex:
    """Stored M+ of the samples, falling back to :func:`m_plus_estimate`."""
    return samples.m_plus if samples.m_plus is not None else m_plus_estimate(samples)


def discrete_h2_error_sq(samples: SampleSet, model: PoleResidueModel, grid: QuadGrid) -> float:
    """Quadrature estimate of ``||H - H_r||^2`` on the grid.

    ``M+-[H_r]`` is the residue sum; ``M+[H]`` comes from the samples and
    ``M-[H] = conj(M+[H])``.
    """
    order = match_grid(samples, grid)
    err = samples.values[order] - eval_pole_residue(model, grid.nodes)
    mh = samples_m_plus(samples)
    mr = model.moment()
    return h2_norm_sq_estimate(err, mh - mr, np.conj(mh) - mr, grid)
