"""Pole-set distances, a priori bounds, stopping tests and cycle detection."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import DivByZero, InvalidParam, LengthMismatch

ENUM_MAX_ORDER = 8


class StopDecision(enum.Enum):
    CONTINUE = "CONTINUE"
    CONVERGED_BACKWARD = "CONVERGED_BACKWARD"


@dataclass(frozen=True)
class TraceStep:
    """Diagnostics of one relocation step.

    ``zeros`` are the relocated poles before mirroring and ``omega`` is the
    matching distance between ``lam`` and ``zeros``. ``delta`` is the
    relative change from ``lam`` to the mirrored ``lam_next``.
    """

    k: int
    lam: np.ndarray
    zeros: np.ndarray
    lam_next: np.ndarray
    max_abs_varphi: float
    mu: float
    omega: float
    delta: float
    mirrored: int
    residual: float


@lru_cache(maxsize=ENUM_MAX_ORDER + 1)
def _permutations(r: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(r))), dtype=np.intp).reshape(-1, r)


def _perfect_matching(mask: np.ndarray) -> Optional[np.ndarray]:
    match = maximum_bipartite_matching(csr_matrix(mask.astype(np.int8)), perm_type="column")
    return None if np.any(match < 0) else match


def matching_distance(a, b):
    """Optimal matching distance between two pole sets of equal size.

    ``min_sigma max_j |a_j - b_sigma(j)|``. Exact enumeration for up to
    eight poles, otherwise a bottleneck assignment: binary search over the
    sorted pairwise distances with a perfect-matching feasibility test.

    Returns
    -------
    omega : float
    perm : ndarray of int
        ``b[perm[j]]`` is matched with ``a[j]``.

    >>> matching_distance([-1, -2], [-2.1, -1.05])[0]
    0.10000000000000009
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise LengthMismatch(f"pole sets of sizes {a.size} and {b.size}")
    r = a.size
    if r == 0:
        return 0.0, np.zeros(0, dtype=np.intp)
    D = np.abs(a[:, None] - b[None, :])
    if r <= ENUM_MAX_ORDER:
        perms = _permutations(r)
        cost = D[np.arange(r), perms].max(axis=1)
        best = int(np.argmin(cost))
        return float(cost[best]), perms[best].copy()

    cand = np.unique(D)
    # the row-wise and column-wise minima give a lower bound
    lo = int(np.searchsorted(cand, max(D.min(axis=1).max(), D.min(axis=0).max())))
    hi = cand.size - 1
    best = _perfect_matching(D <= cand[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        match = _perfect_matching(D <= cand[mid])
        if match is None:
            lo = mid + 1
        else:
            hi, best = mid, match
    if best is None or lo != hi:
        best = _perfect_matching(D <= cand[lo])
    return float(D[np.arange(r), best].max()), best.astype(np.intp)


def relative_change(new, old) -> float:
    """``max_j |(new_j - old_sigma(j)) / new_j|`` under the optimal matching."""
    new = np.asarray(new, dtype=complex).ravel()
    old = np.asarray(old, dtype=complex).ravel()
    if new.size == 0:
        return 0.0
    _, perm = matching_distance(new, old)
    denom = np.abs(new)
    denom = np.where(denom == 0, 1.0, denom)
    return float(np.max(np.abs(new - old[perm]) / denom))


def check_matching_bound(omega: float, r: int, max_abs_varphi: float) -> bool:
    """True iff ``omega <= r (2r - 1) max|varphi| + 1e-12``."""
    return omega <= r * (2 * r - 1) * max_abs_varphi + 1e-12


def stopping_decision(step, eps: float, r: int) -> StopDecision:
    """Backward-error test ``max|varphi| <= eps * mu / r``.

    `step` is any object with ``max_abs_varphi`` and ``mu`` attributes.
    """
    if not step.mu > 0:
        raise InvalidParam("mu must be positive")
    if step.max_abs_varphi <= eps * step.mu / r:
        return StopDecision.CONVERGED_BACKWARD
    return StopDecision.CONTINUE


def entrywise_change_bound(omega: float, mu: float) -> float:
    """Bound ``omega / mu`` on the relative change of Cauchy entries."""
    if mu == 0:
        raise DivByZero("mu is zero: a node coincides with a sample point")
    return omega / mu


def measured_entry_change(points, lam_old, lam_new) -> float:
    """Largest relative change ``|(C_old - C_new) / C_new|`` over all entries.

    Columns of the new Cauchy matrix are matched to the old ones by the
    optimal matching permutation.
    """
    points = np.asarray(points, dtype=complex).ravel()
    lam_old = np.asarray(lam_old, dtype=complex).ravel()
    lam_new = np.asarray(lam_new, dtype=complex).ravel()
    _, perm = matching_distance(lam_old, lam_new)
    new = lam_new[perm]
    # (C_old - C_new) / C_new simplifies to (lam_old - lam_new) / (xi - lam_old)
    ratio = (lam_old - new)[None, :] / (points[:, None] - lam_old[None, :])
    return float(np.max(np.abs(ratio)))


def detect_period(deltas: Sequence[float], window: int, tol: float = 1e-8) -> Optional[int]:
    """Smallest period of the trailing `window` entries of `deltas`.

    A period ``tau <= window // 2`` qualifies when
    ``|d_k - d_{k - tau}| <= tol (1 + |d_k|)`` for every pair inside the
    window. Returns None if none qualifies or the sequence is too short.

    >>> detect_period([5, 2.02, 3.41, 2.02, 3.41, 2.02, 3.41], 6)
    2
    """
    d = np.asarray(deltas, dtype=float).ravel()
    window = int(window)
    if window < 2 or d.size < window:
        return None
    tail = d[-window:]
    for tau in range(1, window // 2 + 1):
        if np.all(np.abs(tail[tau:] - tail[:-tau]) <= tol * (1 + np.abs(tail[tau:]))):
            return tau
    return None
