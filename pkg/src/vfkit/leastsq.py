"""Dense weighted, regularized and total least-squares solvers.

All solvers accept real or complex data and work in the field of the
input. Row weights are the diagonal of ``W``; column scalings (``T`` in the
TLS routines) are the diagonal of ``T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la

from .errors import InvalidParam, LengthMismatch, NonGenericTls, RankDeficient

RANK_RTOL = 1e-12
TLS_GAP_RTOL = 1e-10


@dataclass(frozen=True)
class WlsProblem:
    """Minimize ``||W (A x - b)||_2`` with ``W = diag(row_weights)``."""

    A: np.ndarray
    b: np.ndarray
    row_weights: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.asarray(self.A)
        if A.ndim != 2:
            raise InvalidParam("A must be a matrix")
        b = np.asarray(self.b).ravel()
        m, n = A.shape
        if b.size != m:
            raise LengthMismatch(f"A has {m} rows but b has {b.size} entries")
        if m < n:
            raise InvalidParam(f"underdetermined system: {m} rows < {n} columns")
        w = np.ones(m) if self.row_weights is None else np.asarray(self.row_weights, dtype=float).ravel()
        if w.size != m:
            raise LengthMismatch("row_weights must have one entry per row")
        if not np.all(np.isfinite(w) & (w > 0)):
            raise InvalidParam("row weights must be positive and finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "row_weights", w)


def _weights(w, m):
    if w is None:
        return np.ones(m)
    w = np.asarray(w, dtype=float).ravel()
    if w.size != m:
        raise LengthMismatch(f"expected {m} weights, got {w.size}")
    if not np.all(np.isfinite(w) & (w > 0)):
        raise InvalidParam("weights must be positive and finite")
    return w


def _qr_solve(A, b, sort_rows=True, check_rank=True):
    """Least-squares solve of an already weighted system.

    Rows are sorted by decreasing infinity norm and columns scaled to unit
    2-norm before a column-pivoted QR factorization.
    """
    m, n = A.shape
    if n == 0:
        return np.zeros(0, dtype=np.result_type(A, b, float))
    if sort_rows:
        order = np.argsort(-np.max(np.abs(A), axis=1), kind="stable")
        A, b = A[order], b[order]
    cn = np.linalg.norm(A, axis=0)
    if np.any(cn == 0):
        if check_rank:
            raise RankDeficient("coefficient matrix has a zero column")
        cn = np.where(cn == 0, 1.0, cn)
    Q, R, P = la.qr(A / cn, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if check_rank and d.min() < RANK_RTOL * d[0]:
        rank = int(np.sum(d >= RANK_RTOL * d[0]))
        raise RankDeficient(f"numerical rank {rank} < {n} columns")
    tiny = np.finfo(float).tiny
    if not check_rank and d.min() <= tiny:
        # exact rank loss: drop the trailing null directions
        k = int(np.sum(d > tiny))
        y = np.zeros(n, dtype=np.result_type(A, b))
        y[:k] = la.solve_triangular(R[:k, :k], (Q.conj().T @ b)[:k])
    else:
        y = la.solve_triangular(R, Q.conj().T @ b)
    x = np.empty_like(y)
    x[P] = y
    return x / cn


def solve_wls(p: WlsProblem, sort_rows: bool = True):
    """Weighted least squares by row-sorted, column-pivoted QR.

    Returns
    -------
    x : ndarray
    residual_norm : float
        ``||W (A x - b)||_2``.

    Raises
    ------
    RankDeficient
        If the numerical rank is below the column count at relative
        threshold ``1e-12``.

    Examples
    --------
    >>> x, res = solve_wls(WlsProblem([[1.0], [1.0]], [1.0, 3.0], [2.0, 1.0]))
    >>> round(float(x[0]), 12)
    1.4
    """
    w = p.row_weights
    Aw = p.A * w[:, None]
    bw = p.b * w
    x = _qr_solve(Aw, bw, sort_rows=sort_rows)
    return x, float(np.linalg.norm(Aw @ x - bw))


def solve_regularized(A, b, eta1: float, eta2: float, split: int, row_weights=None):
    """Tikhonov-regularized least squares on a split unknown vector.

    Minimizes ``||W(Ax - b)||^2 + eta1^2 ||x[:split]||^2 + eta2^2 ||x[split:]||^2``
    through the stacked system ``[WA; diag(eta)] x ~ [Wb; 0]``. No rank
    check is made: the augmentation is the remedy for rank loss.
    """
    A = np.asarray(A)
    b = np.asarray(b).ravel()
    m, n = A.shape
    if b.size != m:
        raise LengthMismatch(f"A has {m} rows but b has {b.size} entries")
    if eta1 < 0 or eta2 < 0:
        raise InvalidParam("regularization parameters must be nonnegative")
    if not 0 <= split <= n:
        raise InvalidParam(f"split {split} outside [0, {n}]")
    w = _weights(row_weights, m)
    eta = np.concatenate([np.full(split, float(eta1)), np.full(n - split, float(eta2))])
    Aaug = np.vstack([A * w[:, None], np.diag(eta)])
    baug = np.concatenate([b * w, np.zeros(n, dtype=b.dtype)])
    return _qr_solve(Aaug, baug, check_rank=False)


def _smallest_triplet(G):
    """Smallest singular value of `G` with its singular vectors.

    Returns ``(sigma, u, vh)`` where ``vh`` is the conjugated right singular
    vector as a row. A wide `G` has an exact zero singular value.
    """
    m, k = G.shape
    U, s, Vh = la.svd(G, full_matrices=True)
    s_full = np.zeros(k)
    s_full[: s.size] = s
    if k >= 2 and s_full[-2] - s_full[-1] <= TLS_GAP_RTOL * max(s_full[0], np.finfo(float).tiny):
        raise NonGenericTls("smallest singular value is not simple")
    sigma = float(s_full[-1])
    u = U[:, k - 1] if m >= k else np.zeros(m, dtype=U.dtype)
    return sigma, u, Vh[-1]


def _diag(v, size, name):
    if v is None:
        return np.ones(size)
    v = np.asarray(v, dtype=float)
    if v.ndim == 2:
        v = np.diag(v)
    v = v.ravel()
    if v.size != size:
        raise LengthMismatch(f"{name} must have {size} diagonal entries")
    if not np.all(np.isfinite(v) & (v > 0)):
        raise InvalidParam(f"{name} must be positive and finite")
    return v


def _solution_from_null(y, t, n):
    """Map a null vector ``y`` of ``W[A b]T`` to ``x`` with ``[A b](x; -1) = 0``."""
    z = t * y
    if abs(z[n]) <= 1e-14 * np.linalg.norm(z):
        raise NonGenericTls("right singular vector has a vanishing last component")
    return -z[:n] / z[n]


def solve_tls(A, b, W=None, T=None):
    """Closed-form weighted total least squares.

    With ``G = W [A b] T`` and its smallest singular triplet
    ``(sigma, u, v = (z; eta))``, the minimal correction is
    ``[dA r] = -sigma W^{-1} u v^* T^{-1}`` and
    ``x = -diag(t_1..t_n) z / (eta t_{n+1})``.

    Returns
    -------
    x, deltaA, rhat, sigma_min
        ``(A + deltaA) x = b + rhat`` holds and
        ``||W [deltaA rhat] T||_F = sigma_min``.

    Raises
    ------
    NonGenericTls
        If the smallest singular value is not simple or ``eta`` vanishes.
    """
    A = np.asarray(A)
    b = np.asarray(b).ravel()
    m, n = A.shape
    if b.size != m:
        raise LengthMismatch(f"A has {m} rows but b has {b.size} entries")
    w = _diag(W, m, "W")
    t = _diag(T, n + 1, "T")
    G = np.column_stack([A, b]) * w[:, None] * t[None, :]
    sigma, u, vh = _smallest_triplet(G)
    x = _solution_from_null(vh.conj(), t, n)
    E = -sigma * (u / w)[:, None] * (vh / t)[None, :]
    return x, E[:, :n], E[:, n], sigma


def solve_mixed_ls_tls(A, b, n_exact: int, W=None, T=None):
    """Mixed LS/TLS: the first `n_exact` columns of `A` are error-free.

    The exact columns are eliminated by a QR factorization, TLS is solved on
    the remaining block and the exact unknowns are back-substituted.

    Returns
    -------
    x : ndarray
    correction : ndarray, shape (m, n + 1)
        ``[deltaA rhat]`` with ``(A + deltaA) x = b + rhat``; its first
        `n_exact` columns are zero.
    """
    A = np.asarray(A)
    b = np.asarray(b).ravel()
    m, n = A.shape
    if b.size != m:
        raise LengthMismatch(f"A has {m} rows but b has {b.size} entries")
    if not 0 <= n_exact <= n:
        raise InvalidParam(f"n_exact must lie in [0, {n}]")
    w = _diag(W, m, "W")
    t = _diag(T, n + 1, "T")
    dtype = np.result_type(A, b, float)
    if n_exact == 0:
        x, dA, r, _ = solve_tls(A, b, w, t)
        return x, np.column_stack([dA, r]).astype(dtype)
    if n_exact == n:
        x, _ = solve_wls(WlsProblem(A, b, w))
        corr = np.zeros((m, n + 1), dtype=dtype)
        corr[:, n] = A @ x - b
        return x, corr

    G = np.column_stack([A, b]) * w[:, None] * t[None, :]
    n1 = n_exact
    Q, R = la.qr(G[:, :n1], mode="full")
    Rt = Q.conj().T @ G
    R11 = Rt[:n1, :n1]
    d = np.abs(np.diag(R11))
    if d.min() < RANK_RTOL * d.max():
        raise RankDeficient("error-free columns are rank deficient")
    R12 = Rt[:n1, n1:]
    R22 = Rt[n1:, n1:]
    sigma, u2, vh2 = _smallest_triplet(R22)
    y2 = vh2.conj()
    y1 = -la.solve_triangular(R11, R12 @ y2)
    x = _solution_from_null(np.concatenate([y1, y2]), t, n)
    dG = np.zeros((m, n + 1), dtype=np.result_type(G, u2))
    dG[:, n1:] = -sigma * (Q[:, n1:] @ u2)[:, None] * vh2[None, :]
    corr = dG / w[:, None] / t[None, :]
    return x, corr


def tls_objective_decomposition(rhat, C, W=None, T=None) -> float:
    """Structured objective for the displacement ``E = (rhat e^T) o C``.

    ``t_{r+1}^2 ||W rhat||^2 + sum_j t_j^2 ||W (rhat o C[:, j])||^2``.

    >>> tls_objective_decomposition([3.0], [[2.0]])
    45.0
    """
    rhat = np.asarray(rhat).ravel()
    C = np.asarray(C)
    if C.ndim == 1:
        C = C[:, None]
    m, r = C.shape
    if rhat.size != m:
        raise LengthMismatch("rhat and C must have the same number of rows")
    w = _diag(W, m, "W")
    t = _diag(T, r + 1, "T")
    wr = w * rhat
    total = t[r] ** 2 * np.sum(np.abs(wr) ** 2)
    total += np.sum(t[:r] ** 2 * np.sum(np.abs(wr[:, None] * C) ** 2, axis=0))
    return float(total)
