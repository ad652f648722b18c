"""Iteration engines: SK (polynomial and barycentric), VF, QuadVF and SobVF.

The barycentric LS problems are solved either in complex arithmetic or, when
samples and nodes are closed under conjugation, in an equivalent real form
where each conjugate node pair ``(lam, conj(lam))`` carries the basis
``1/(s-lam) + 1/(s-conj(lam))`` and ``i/(s-lam) - i/(s-conj(lam))``.
This yields exactly conjugate-paired coefficients and real models.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as la

from .convergence import (
    TraceStep,
    detect_period,
    matching_distance,
    relative_change,
    stopping_decision,
    StopDecision,
)
from .errors import (
    DegenerateDenominator,
    DuplicatePoles,
    InvalidParam,
    MissingDerivative,
    NumericalError,
    TooFewSamples,
)
from .leastsq import (
    WlsProblem,
    solve_mixed_ls_tls,
    solve_regularized,
    solve_tls,
    solve_wls,
)
from .model import (
    BarycentricState,
    PoleResidueModel,
    SampleSet,
    cauchy_matrix,
    conjugate_partners,
)
from .quadrature import QuadGrid, match_grid, samples_m_plus


class Variant(enum.Enum):
    SK_POLY = "sk_poly"
    SK_BARY = "sk_bary"
    VF = "vf"
    QUADVF = "quadvf"
    SOBVF = "sobvf"


class Solver(enum.Enum):
    WLS = "wls"
    REGULARIZED = "regularized"
    TLS = "tls"
    MIXED_LS_TLS = "mixed"


class FitStatus(enum.Enum):
    CONVERGED = "CONVERGED"
    PERIODIC = "PERIODIC"
    MAX_ITERS = "MAX_ITERS"
    DEGENERATE = "DEGENERATE"


# consecutive relative pole changes below this count as a fixed point
STATIONARY_TOL = 1e-8
STATIONARY_RUN = 3


@dataclass(frozen=True)
class FitConfig:
    """Settings of :func:`fit`.

    ``real=None`` realifies automatically when the samples are closed under
    conjugation; ``real=True`` forces real models, e.g. for data given on
    the positive frequency axis only.
    """

    order: int
    variant: Variant = Variant.VF
    solver: Solver = Solver.WLS
    max_iters: int = 100
    eps_backward: float = 1e-10
    eta1: float = 1e-16
    eta2: float = float(np.sqrt(np.finfo(float).eps))
    initial_poles: Optional[Sequence[complex]] = None
    grid: Optional[QuadGrid] = None
    period_window: int = 20
    period_tol: float = 1e-8
    real: Optional[bool] = None

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise InvalidParam(f"order must be a positive integer, got {self.order}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidParam(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.eps_backward > 0:
            raise InvalidParam("eps_backward must be positive")
        if self.eta1 < 0 or self.eta2 < 0:
            raise InvalidParam("eta1 and eta2 must be nonnegative")
        if self.period_window < 2:
            raise InvalidParam("period_window must be >= 2")
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "solver", Solver(self.solver))
        if self.initial_poles is not None:
            poles = np.array(self.initial_poles, dtype=complex).ravel()
            if poles.size != self.order:
                raise InvalidParam(f"{poles.size} initial poles for order {self.order}")
            poles.flags.writeable = False
            object.__setattr__(self, "initial_poles", poles)


@dataclass(frozen=True)
class StepDiagnostics:
    zeros: np.ndarray
    flipped: tuple
    max_abs_varphi: float
    mu: float
    residual: float


@dataclass(frozen=True)
class FitResult:
    model: PoleResidueModel
    iterations: int
    status: FitStatus
    history: tuple
    relative_ls_residual: float
    period: Optional[int] = None
    variant: Variant = Variant.VF

    @property
    def status_label(self) -> str:
        if self.status is FitStatus.PERIODIC:
            return f"PERIODIC({self.period})"
        return self.status.value


# ---------------------------------------------------------------- realification


def _pair_structure(lam, tol_rel=1e-12):
    """Partner indices of conjugate-closed nodes, or None."""
    lam = np.asarray(lam, dtype=complex)
    if lam.size == 0:
        return np.zeros(0, dtype=int)
    scale = max(1.0, float(np.max(np.abs(lam))))
    return conjugate_partners(lam, tol_rel * scale)


def real_basis(lam) -> np.ndarray:
    """Matrix ``T`` mapping real coordinates to conjugate-paired coefficients.

    For a pair at indices ``i < j`` the columns ``i`` and ``j`` of ``T`` are
    ``e_i + e_j`` and ``1j (e_i - e_j)``; real nodes keep ``e_i``.
    """
    lam = np.asarray(lam, dtype=complex)
    partner = _pair_structure(lam)
    if partner is None:
        raise InvalidParam("nodes are not closed under conjugation")
    r = lam.size
    T = np.zeros((r, r), dtype=complex)
    for i in range(r):
        j = int(partner[i])
        if j == i:
            T[i, i] = 1.0
        elif i < j:
            T[i, i] = T[j, i] = 1.0
            T[i, j] = 1j
            T[j, j] = -1j
    return T


def _realify_rows(A, h, w):
    """Stack real and imaginary parts; drop rows that vanish identically."""
    Ar = np.vstack([A.real, A.imag])
    hr = np.concatenate([h.real, h.imag])
    wr = np.concatenate([w, w])
    keep = np.any(Ar != 0, axis=1)
    return Ar[keep], hr[keep], wr[keep]


def _use_real(samples: SampleSet, lam, config: Optional[FitConfig]) -> bool:
    if config is not None and config.real is False:
        return False
    if _pair_structure(lam) is None:
        return False
    if config is not None and config.real:
        return True
    return samples.conjugate_closed


# ---------------------------------------------------------------- assembly


def assemble_cauchy_system(samples: SampleSet, lam, grid: Optional[QuadGrid] = None):
    """Linearized barycentric system ``A (phi; varphi) ~ h`` with weights.

    ``A[i, j] = 1/(xi_i - lam_j)`` and ``A[i, r+j] = -H(xi_i)/(xi_i - lam_j)``.
    With a grid, rows follow the node order, the moment row
    ``(1, ..., 1, 0, ..., 0)`` with right-hand side ``M+[H]`` is appended and
    the weights are ``(rho_1, ..., rho_ell, rho_plus)``. Otherwise the weights
    are the reciprocal sample sigmas (or ones).

    Returns
    -------
    A, h, w
    """
    lam = np.asarray(lam, dtype=complex).ravel()
    r = lam.size
    if grid is None:
        pts, vals, w = samples.points, samples.values, samples.row_weights()
    else:
        order = match_grid(samples, grid)
        pts, vals, w = samples.points[order], samples.values[order], grid.weights
    C = cauchy_matrix(pts, lam)
    A = np.hstack([C, -vals[:, None] * C])
    h = np.array(vals, dtype=complex)
    w = np.array(w, dtype=float)
    if grid is not None:
        A = np.vstack([A, np.concatenate([np.ones(r), np.zeros(r)])])
        h = np.append(h, samples_m_plus(samples))
        w = np.append(w, grid.rho_plus)
    return A, h, w


def assemble_sobolev_system(samples: SampleSet, lam, W0=None, W1=None):
    """Block system for value and derivative matching.

    ``[[C, -D C], [-(C o C), D (C o C) - D' C]]`` with ``D = diag(H)`` and
    ``D' = diag(H')``; right-hand side ``(h; h')`` and row weights
    ``(W0; W1)`` (ones by default).

    Returns
    -------
    A, rhs, w
    """
    if samples.derivs is None:
        raise MissingDerivative("Sobolev fitting needs derivative samples")
    lam = np.asarray(lam, dtype=complex).ravel()
    ell = len(samples)
    H, Hp = samples.values, samples.derivs
    C = cauchy_matrix(samples.points, lam)
    C2 = C * C
    top = np.hstack([C, -H[:, None] * C])
    bottom = np.hstack([-C2, H[:, None] * C2 - Hp[:, None] * C])
    w0 = np.ones(ell) if W0 is None else np.asarray(W0, dtype=float).ravel()
    w1 = np.ones(ell) if W1 is None else np.asarray(W1, dtype=float).ravel()
    if w0.size != ell or w1.size != ell:
        raise InvalidParam("Sobolev weights must have one entry per sample")
    return np.vstack([top, bottom]), np.concatenate([H, Hp]), np.concatenate([w0, w1])


def _sobolev_weights(samples: SampleSet, config: FitConfig):
    """Value and derivative row weights in sample order."""
    if config.grid is not None:
        order = match_grid(samples, config.grid)
        w = np.empty(len(samples))
        w[order] = config.grid.weights
    else:
        w = samples.row_weights()
    return w, w


def _system(samples: SampleSet, lam, config: FitConfig):
    if config.variant is Variant.SOBVF:
        w0, w1 = _sobolev_weights(samples, config)
        return assemble_sobolev_system(samples, lam, w0, w1)
    grid = config.grid if config.variant is Variant.QUADVF else None
    return assemble_cauchy_system(samples, lam, grid)


def _solve(A, h, w, r, config: FitConfig, residue_step=False):
    """Dispatch to the configured solver; return ``(x, ||W(Ax-h)||)``."""
    solver = config.solver
    if residue_step and solver in (Solver.TLS, Solver.MIXED_LS_TLS):
        solver = Solver.WLS
    if solver is Solver.WLS:
        x, res = solve_wls(WlsProblem(A, h, w))
        return x, res
    if solver is Solver.REGULARIZED:
        split = A.shape[1] if residue_step else r
        x = solve_regularized(A, h, config.eta1, config.eta2, split, w)
    elif solver is Solver.TLS:
        x = solve_tls(A, h, w)[0]
    else:
        x = solve_mixed_ls_tls(A, h, r, w)[0]
    return x, float(np.linalg.norm(w * (A @ x - h)))


def _solve_barycentric(samples: SampleSet, lam, config: FitConfig, row_scale=None):
    """Solve the linearized system at nodes `lam` for ``(phi, varphi)``."""
    lam = np.asarray(lam, dtype=complex)
    r = lam.size
    A, h, w = _system(samples, lam, config)
    if row_scale is not None:
        w = w * row_scale
    if _use_real(samples, lam, config):
        T = real_basis(lam)
        Tb = la.block_diag(T, T)
        Ar, hr, wr = _realify_rows(A @ Tb, h, w)
        c, res = _solve(Ar, hr, wr, r, config)
        x = Tb @ c
    else:
        x, res = _solve(A, h, w, r, config)
    return BarycentricState(lam, x[:r], x[r:]), res


# ---------------------------------------------------------------- relocation


def _denominator_terms(varphi, lam, z):
    keep = varphi != 0
    return varphi[keep], lam[keep], z


def _verify_zero(z, lam, varphi):
    """Check ``|d(z)| <= 1e-8 (1 + sum |varphi_j / (z - lam_j)|)``.

    The test allows for the rounding of `z` itself: a zero within a few
    ulps of a node can only be resolved to that accuracy, and is accepted
    when the node's coefficient is equally small.
    """
    dz = 8 * np.finfo(float).eps * max(abs(z), 1.0)
    near = np.abs(z - lam) <= dz
    if np.any(near):
        # a node with vanishing coefficient is itself a zero of d
        return bool(np.all(np.abs(varphi[near]) <= 1e3 * dz))
    vp, lm, _ = _denominator_terms(varphi, lam, z)
    if vp.size == 0:
        return True
    diff = z - lm
    terms = vp / diff
    val = abs(1.0 + terms.sum())
    slope = abs(np.sum(terms / diff))
    return val <= 1e-8 * (1.0 + np.abs(terms).sum()) + slope * dz


def _newton_polish(z, lam, varphi, steps=8):
    vp, lm, _ = _denominator_terms(varphi, lam, z)
    for _ in range(steps):
        diff = z - lm
        if np.any(diff == 0):
            break
        f = 1.0 + np.sum(vp / diff)
        fp = -np.sum(vp / diff**2)
        if fp == 0:
            break
        z = z - f / fp
    return z


def relocate_poles(state: BarycentricState) -> np.ndarray:
    """Zeros of ``1 + sum varphi_j / (s - lam_j)``.

    Computed as eigenvalues of ``diag(lam) - varphi 1^T``; for conjugate
    paired nodes and coefficients an equivalent real matrix is used so the
    zeros come out exactly conjugate-paired. Each zero is verified against
    the denominator (with a Newton polish as second chance).

    Raises
    ------
    DegenerateDenominator
        If some zero cannot be verified.

    >>> relocate_poles(BarycentricState([-1.0], [0.0], [0.5]))
    array([-1.5+0.j])
    """
    lam = np.asarray(state.lam, dtype=complex)
    varphi = np.asarray(state.varphi, dtype=complex)
    r = lam.size
    if r == 0:
        return np.zeros(0, dtype=complex)
    partner = _pair_structure(lam)
    paired = partner is not None and np.allclose(
        varphi[partner], np.conj(varphi), rtol=1e-12, atol=1e-300
    )
    if paired:
        M = np.zeros((r, r))
        bvec = np.zeros(r)
        cvec = np.zeros(r)
        for i in range(r):
            j = int(partner[i])
            if j == i:
                M[i, i] = lam[i].real
                bvec[i] = 1.0
                cvec[i] = varphi[i].real
            elif i < j:
                a, b = lam[i].real, lam[i].imag
                M[i, i] = M[j, j] = a
                M[i, j] = b
                M[j, i] = -b
                bvec[i] = 2.0
                cvec[i], cvec[j] = varphi[i].real, varphi[i].imag
        zeros = la.eigvals(M - np.outer(bvec, cvec))
    else:
        zeros = la.eigvals(np.diag(lam) - np.outer(varphi, np.ones(r)))
    zeros = np.asarray(zeros, dtype=complex)
    if not np.all(np.isfinite(zeros)):
        raise DegenerateDenominator("relocation produced non-finite zeros")
    for k, z in enumerate(zeros):
        if _verify_zero(z, lam, varphi):
            continue
        zp = _newton_polish(z, lam, varphi)
        if not _verify_zero(zp, lam, varphi):
            raise DegenerateDenominator(f"zero {z!r} of the denominator failed verification")
        zeros[k] = zp
    if paired:
        zeros = _restore_pairs(zeros)
    return zeros


def _restore_pairs(z):
    """Make nearly conjugate-paired values exactly paired."""
    z = np.array(z, dtype=complex)
    partner = _pair_structure(z, tol_rel=1e-10)
    if partner is None:
        return z
    for i in range(z.size):
        j = int(partner[i])
        if j == i:
            z[i] = z[i].real
        elif i < j:
            z[j] = np.conj(z[i])
    return z


def mirror_unstable(lambda_next):
    """Reflect poles with ``Re > 0`` to ``-conj(lam)``.

    Poles on the imaginary axis are nudged to ``Re = -1e-8 (1 + |Im|)``
    without being counted as flipped.

    Returns
    -------
    lambda_hat : ndarray
    flipped : list of int
        Zero-based indices of the reflected poles.
    """
    lam = np.array(lambda_next, dtype=complex).ravel()
    flipped = [int(i) for i in np.flatnonzero(lam.real > 0)]
    lam[flipped] = -np.conj(lam[flipped])
    axis = lam.real == 0
    lam[axis] = -1e-8 * (1.0 + np.abs(lam[axis].imag)) + 1j * lam[axis].imag
    return lam, flipped


def mirrored_denominator_residues(lambda_hat_flipped) -> np.ndarray:
    """Residues ``beta`` of ``1 + sum beta_j/(s - lh_j)`` with zeros at ``-lh``.

    ``beta_j = prod_l (lh_j + lh_l) / prod_{l != j} (lh_j - lh_l)``. The
    resulting all-pass factor has unit modulus on the imaginary axis.
    """
    lh = np.asarray(lambda_hat_flipped, dtype=complex).ravel()
    if np.unique(lh).size != lh.size:
        raise DuplicatePoles("mirrored poles must be distinct")
    beta = np.empty(lh.size, dtype=complex)
    for j in range(lh.size):
        others = np.delete(lh, j)
        beta[j] = np.prod(lh[j] + lh) / np.prod(lh[j] - others)
    return beta


# ---------------------------------------------------------------- iteration


def _mu(samples: SampleSet, lam) -> float:
    lam = np.asarray(lam, dtype=complex)
    return float(np.min(np.abs(samples.points[:, None] - lam[None, :])))


def vf_step(samples: SampleSet, lambda_current, config: FitConfig):
    """One relocation step.

    Solves the linearized barycentric problem at `lambda_current`, moves
    the nodes to the zeros of the denominator and reflects unstable ones.

    Returns
    -------
    state : BarycentricState
    lambda_next : ndarray
    diag : StepDiagnostics
    """
    lam = np.asarray(lambda_current, dtype=complex).ravel()
    state, res = _solve_barycentric(samples, lam, config)
    zeros = relocate_poles(state)
    lam_next, flipped = mirror_unstable(zeros)
    diag = StepDiagnostics(
        zeros=zeros,
        flipped=tuple(flipped),
        max_abs_varphi=float(np.max(np.abs(state.varphi))),
        mu=_mu(samples, lam),
        residual=res,
    )
    return state, lam_next, diag


def _residue_system(samples: SampleSet, lam, config: Optional[FitConfig]):
    lam = np.asarray(lam, dtype=complex)
    variant = config.variant if config is not None else Variant.VF
    if variant is Variant.SOBVF:
        if samples.derivs is None:
            raise MissingDerivative("Sobolev residues need derivative samples")
        w0, w1 = _sobolev_weights(samples, config)
        C = cauchy_matrix(samples.points, lam)
        A = np.vstack([C, -C * C])
        return A, np.concatenate([samples.values, samples.derivs]), np.concatenate([w0, w1])
    grid = config.grid if (config is not None and variant is Variant.QUADVF) else None
    A, h, w = assemble_cauchy_system(samples, lam, grid)
    return A[:, : lam.size], h, w


def identify_residues(samples: SampleSet, lambda_converged, config: Optional[FitConfig] = None,
                      return_residual: bool = False):
    """Residues for fixed poles by weighted least squares.

    Value rows for VF (plus the weighted moment row for QuadVF); stacked
    value and derivative rows for SobVF.

    Returns
    -------
    model : PoleResidueModel
    residual : float, only if `return_residual`
        ``||W (A phi - h)||`` of the residue system.
    """
    lam = np.asarray(lambda_converged, dtype=complex).ravel()
    cfg = config if config is not None else FitConfig(order=max(lam.size, 1))
    A, h, w = _residue_system(samples, lam, cfg)
    real = _use_real(samples, lam, cfg)
    if real:
        T = real_basis(lam)
        Ar, hr, wr = _realify_rows(A @ T, h, w)
        c, res = _solve(Ar, hr, wr, lam.size, cfg, residue_step=True)
        phi = T @ c
    else:
        phi, res = _solve(A, h, w, lam.size, cfg, residue_step=True)
    model = PoleResidueModel(lam, phi, real_symmetric=real)
    if return_residual:
        return model, res
    return model


def relative_residual(samples: SampleSet, model: PoleResidueModel, config: Optional[FitConfig] = None) -> float:
    """``||W (A phi - h)|| / ||W h||`` of the residue system of `config`."""
    cfg = config if config is not None else FitConfig(order=max(model.order, 1))
    A, h, w = _residue_system(samples, model.poles, cfg)
    den = float(np.linalg.norm(w * h))
    num = float(np.linalg.norm(w * (A @ model.residues - h)))
    return num / den if den > 0 else num


def default_initial_poles(samples: SampleSet, r: int) -> np.ndarray:
    """Lightly damped pairs ``-(0.01 + i) w_k`` over the sampled band.

    One real pole ``-sqrt(w_lo w_hi)`` is added for odd `r`.
    """
    lo, hi = samples.band()
    npairs = r // 2
    if npairs == 1:
        w = np.array([np.sqrt(lo * hi)])
    else:
        w = np.geomspace(lo, hi, npairs) if npairs else np.empty(0)
    poles = []
    for wk in w:
        p = -(0.01 + 1j) * wk
        poles.extend([np.conj(p), p])
    if r % 2:
        poles.append(-np.sqrt(lo * hi) + 0j)
    return np.array(poles, dtype=complex)


def _check_sizes(samples: SampleSet, config: FitConfig):
    r = config.order
    eqs = len(samples) * (2 if config.variant is Variant.SOBVF else 1)
    if eqs < 2 * r + 1:
        raise TooFewSamples(f"{eqs} equations for order {r}; need at least {2 * r + 1}")
    if config.variant is Variant.SOBVF and samples.derivs is None:
        raise MissingDerivative("SOBVF needs derivative samples")
    if config.variant is Variant.QUADVF and config.grid is None:
        raise InvalidParam("QUADVF needs a quadrature grid")


def _finalize(samples, config, candidates, status, period, history, variant):
    best = None
    last_err = None
    for cand in candidates:
        lam, _ = mirror_unstable(cand)
        try:
            model, res = identify_residues(samples, lam, config, return_residual=True)
        except NumericalError as exc:
            last_err = exc
            continue
        if best is None or res < best[1]:
            best = (model, res)
    if best is None:
        raise last_err
    model = best[0]
    return FitResult(
        model=model,
        iterations=len(history),
        status=status,
        history=tuple(history),
        relative_ls_residual=relative_residual(samples, model, config),
        period=period,
        variant=variant,
    )


def _stationary(deltas) -> bool:
    if len(deltas) < STATIONARY_RUN:
        return False
    return max(deltas[-STATIONARY_RUN:]) <= STATIONARY_TOL


def fit(samples: SampleSet, config: FitConfig) -> FitResult:
    """Fit a pole-residue model of order ``config.order`` to `samples`.

    Iterates relocation steps (or SK reweighting for the SK variants) until
    the backward-error test passes, the pole change stalls, a cycle in the
    relative pole changes is detected, or ``max_iters`` is reached. Residues
    are then identified at the candidate pole sets and the candidate with
    the smallest residue residual is returned. Numerical failures after at
    least one valid step end the run with status DEGENERATE.
    """
    _check_sizes(samples, config)
    if config.variant is Variant.SK_POLY:
        return _fit_sk_poly(samples, config)
    r = config.order
    lam = (np.array(config.initial_poles) if config.initial_poles is not None
           else default_initial_poles(samples, r))
    if _use_real(samples, lam, config):
        lam = _restore_pairs(lam)
    if config.variant is Variant.SK_BARY:
        return _fit_sk_bary(samples, config, lam)

    history = []
    deltas = []
    sets = [lam]
    status, period, candidates = FitStatus.MAX_ITERS, None, None
    for k in range(1, config.max_iters + 1):
        try:
            state, lam_next, diag = vf_step(samples, lam, config)
        except NumericalError:
            if not history:
                raise
            status, candidates = FitStatus.DEGENERATE, [lam]
            break
        omega = matching_distance(lam, diag.zeros)[0]
        delta = relative_change(lam_next, lam)
        step = TraceStep(k, lam, diag.zeros, lam_next, diag.max_abs_varphi, diag.mu,
                         omega, delta, len(diag.flipped), diag.residual)
        history.append(step)
        deltas.append(delta)
        if stopping_decision(step, config.eps_backward, r) is StopDecision.CONVERGED_BACKWARD:
            status, candidates = FitStatus.CONVERGED, [lam, lam_next]
            break
        lam = lam_next
        sets.append(lam)
        if _stationary(deltas):
            status, candidates = FitStatus.CONVERGED, [sets[-2], lam]
            break
        tau = detect_period(deltas, config.period_window, config.period_tol)
        if tau is not None and tau >= 2 and _cycle_confirmed(sets, tau):
            status, period, candidates = FitStatus.PERIODIC, tau, sets[-tau:]
            break
    if candidates is None:
        candidates = sets[-2:]
    return _finalize(samples, config, candidates, status, period, history, config.variant)


def _cycle_confirmed(sets, tau) -> bool:
    """The last pole set repeats the one `tau` steps earlier."""
    if len(sets) < tau + 1:
        return False
    a, b = sets[-1], sets[-1 - tau]
    scale = max(float(np.max(np.abs(a))), np.finfo(float).tiny)
    return matching_distance(a, b)[0] <= 1e-6 * scale


# ---------------------------------------------------------------- SK variants


def _fit_sk_bary(samples: SampleSet, config: FitConfig, lam) -> FitResult:
    """Barycentric SK: fixed nodes, rows reweighted by ``1/|d(xi)|``."""
    r = config.order
    scale = np.ones(len(samples))
    history, deltas, sets = [], [], []
    prev = lam
    status, period = FitStatus.MAX_ITERS, None
    candidates = None
    for k in range(1, config.max_iters + 1):
        try:
            state, res = _solve_barycentric(samples, lam, config, row_scale=scale)
            zeros = relocate_poles(state)
        except NumericalError:
            if not history:
                raise
            status = FitStatus.DEGENERATE
            break
        implied, flipped = mirror_unstable(zeros)
        omega = matching_distance(prev, zeros)[0]
        delta = relative_change(implied, prev)
        history.append(TraceStep(k, np.asarray(prev), zeros, implied,
                                 float(np.max(np.abs(state.varphi))), _mu(samples, lam),
                                 omega, delta, len(flipped), res))
        deltas.append(delta)
        sets.append(implied)
        prev = implied
        denom = np.abs(1.0 + cauchy_matrix(samples.points, lam) @ state.varphi)
        scale = 1.0 / np.maximum(denom, np.finfo(float).tiny)
        if _stationary(deltas):
            status = FitStatus.CONVERGED
            break
        tau = detect_period(deltas, config.period_window, config.period_tol)
        if tau is not None and tau >= 2 and _cycle_confirmed(sets, tau):
            status, period, candidates = FitStatus.PERIODIC, tau, sets[-tau:]
            break
    if not sets:
        raise DegenerateDenominator("no valid SK iterate")
    if candidates is None:
        candidates = sets[-2:]
    return _finalize(samples, config, candidates, status, period, history, Variant.SK_BARY)


def sk_fit_polynomial(samples: SampleSet, r: int, max_iters: int = 20, tol: float = 1e-12):
    """SK iteration in the monomial basis.

    ``n(s) = sum_{k<r} alpha_k s^k`` and ``d(s) = 1 + sum_{k=1..r} beta_k s^k``.
    Step ``k`` solves ``n(xi) - H d(xi) ~ 0`` with rows scaled by
    ``1/|d^{(k-1)}(xi)|`` (``d^{(0)} = 1``, i.e. Levy's linearization). The
    frequency variable is scaled by ``max |xi|`` internally; returned
    coefficients refer to the unscaled variable.

    Returns
    -------
    alpha : ndarray, shape (r,)
    beta : ndarray, shape (r,)
        ``beta[k-1]`` multiplies ``s^k``.
    history : list of dict
        Keys ``k``, ``residual``, ``change``.

    Raises
    ------
    RankDeficient
        When the Vandermonde system is numerically singular.
    """
    if r < 1:
        raise InvalidParam("order must be positive")
    if len(samples) < 2 * r + 1:
        raise TooFewSamples(f"{len(samples)} samples for order {r}")
    xi = samples.points
    H = samples.values
    sc = float(np.max(np.abs(xi))) or 1.0
    x = xi / sc
    V = x[:, None] ** np.arange(r + 1)[None, :]
    A = np.hstack([V[:, :r], -H[:, None] * V[:, 1:]])
    w0 = samples.row_weights()
    real = samples.conjugate_closed
    weight = np.ones(len(samples))
    coef = None
    history = []
    for k in range(1, max_iters + 1):
        w = w0 * weight
        if real:
            Ar, hr, wr = _realify_rows(A, H, w)
            c, res = solve_wls(WlsProblem(Ar, hr, wr))
        else:
            c, res = solve_wls(WlsProblem(A, H, w))
        change = np.inf if coef is None else float(
            np.linalg.norm(c - coef) / max(np.linalg.norm(c), np.finfo(float).tiny))
        coef = c
        history.append({"k": k, "residual": res, "change": change})
        d = 1.0 + V[:, 1:] @ coef[r:]
        weight = 1.0 / np.maximum(np.abs(d), np.finfo(float).tiny)
        if change <= tol:
            break
    powers = sc ** np.arange(r + 1)
    alpha = coef[:r] / powers[:r]
    beta = coef[r:] / powers[1:]
    return alpha, beta, history


def _fit_sk_poly(samples: SampleSet, config: FitConfig) -> FitResult:
    r = config.order
    alpha, beta, hist = sk_fit_polynomial(samples, r, config.max_iters)
    poles = np.roots(np.concatenate([beta[::-1], [1.0]]))
    if poles.size != r:
        raise DegenerateDenominator("leading denominator coefficient vanished")
    if samples.conjugate_closed or config.real:
        poles = _restore_pairs(poles)
    status = FitStatus.CONVERGED if hist[-1]["change"] <= 1e-12 else FitStatus.MAX_ITERS
    history = [
        TraceStep(h["k"], poles, poles, poles, np.nan, _mu(samples, poles), np.nan,
                  h["change"], 0, h["residual"])
        for h in hist
    ]
    return _finalize(samples, config, [poles], status, None, history, Variant.SK_POLY)
