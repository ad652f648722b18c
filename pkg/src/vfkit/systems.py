"""State-space oracle, random stable test systems and sample synthesis."""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as la

from .errors import InvalidBand, InvalidParam, SingularResolvent
from .model import SampleSet, conjugate_partners


@dataclass(frozen=True)
class StateSpaceModel:
    """Dense SISO realization ``H(s) = C (sI - F)^{-1} B``.

    ``F`` is stored as ``(n, n)``, ``B`` as ``(n, 1)`` and ``C`` as ``(1, n)``.
    With ``stable=True`` the constructor checks that every eigenvalue of
    ``F`` lies in the open left half-plane.
    """

    F: np.ndarray
    B: np.ndarray
    C: np.ndarray
    stable: bool = False

    def __post_init__(self):
        F = np.array(self.F, dtype=float)
        if F.ndim != 2 or F.shape[0] != F.shape[1] or F.shape[0] < 1:
            raise InvalidParam(f"F must be square and nonempty, got shape {F.shape}")
        n = F.shape[0]
        B = np.array(self.B, dtype=float).reshape(-1, 1)
        C = np.array(self.C, dtype=float).reshape(1, -1)
        if B.shape[0] != n or C.shape[1] != n:
            raise InvalidParam("B and C must have n entries")
        for arr in (F, B, C):
            if not np.all(np.isfinite(arr)):
                raise InvalidParam("state-space matrices must be finite")
            arr.flags.writeable = False
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        if self.stable and np.any(la.eigvals(F).real >= 0):
            raise InvalidParam("F flagged stable but has eigenvalues with Re >= 0")

    @property
    def n(self) -> int:
        return self.F.shape[0]

    def poles(self) -> np.ndarray:
        return la.eigvals(self.F)

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        pts = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.array([ss_eval(self, p)[0] for p in pts.ravel()])
        return complex(out[0]) if scalar else out.reshape(pts.shape)


def ss_eval(ss: StateSpaceModel, s: complex, with_deriv: bool = False):
    """Evaluate ``H(s)`` and optionally ``H'(s) = -C (sI-F)^{-2} B``.

    One LU factorization of ``sI - F`` is shared by both solves.

    Returns
    -------
    (h, hp)
        `hp` is None unless `with_deriv`.

    Raises
    ------
    SingularResolvent
        If `s` is (numerically) an eigenvalue of ``F``.
    """
    s = complex(s)
    M = s * np.eye(ss.n) - ss.F
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", la.LinAlgWarning)
        lu, piv = la.lu_factor(M, check_finite=False)
    d = np.abs(np.diag(lu))
    if d.min() <= ss.n * np.finfo(float).eps * max(d.max(), 1.0):
        raise SingularResolvent(f"sI - F is singular at s={s!r}")
    x = la.lu_solve((lu, piv), ss.B[:, 0].astype(complex), check_finite=False)
    h = complex(ss.C[0] @ x)
    if not with_deriv:
        return h, None
    y = la.lu_solve((lu, piv), x, check_finite=False)
    return h, complex(-(ss.C[0] @ y))


def moment_at_infinity(ss: StateSpaceModel) -> complex:
    """Return ``C B``, the limit of ``s H(s)`` as ``|s| -> inf``."""
    return complex((ss.C @ ss.B)[0, 0])


def random_stable_siso(
    n: int,
    seed: int,
    band: Sequence[float] = (1.0, 100.0),
    damping: Sequence[float] = (0.005, 0.1),
) -> StateSpaceModel:
    """Generate a seeded real stable SISO system of order `n`.

    ``n // 2`` conjugate pole pairs get imaginary parts log-spaced over
    `band` and real parts ``-d |Im|`` with ``d`` uniform in `damping`. For odd
    `n` one real pole ``-d w`` is added, ``w`` log-uniform in the band. The
    modal realization is hidden behind a random orthogonal similarity so
    that ``F`` is dense.
    """
    n = int(n)
    if n < 1:
        raise InvalidParam(f"n must be >= 1, got {n}")
    lo, hi = (float(v) for v in band)
    if not (0 < lo < hi and np.isfinite(hi)):
        raise InvalidBand(f"need 0 < w_lo < w_hi, got {band}")
    dlo, dhi = (float(v) for v in damping)
    if not (0 < dlo <= dhi):
        raise InvalidParam(f"invalid damping range {damping}")

    rng = np.random.default_rng(seed)
    npairs = n // 2
    if npairs == 1:
        freqs = np.array([np.sqrt(lo * hi)])
    else:
        freqs = np.geomspace(lo, hi, npairs) if npairs else np.empty(0)
    damp = rng.uniform(dlo, dhi, size=npairs)

    A = np.zeros((n, n))
    for k, (w, d) in enumerate(zip(freqs, damp)):
        a = -d * w
        A[2 * k:2 * k + 2, 2 * k:2 * k + 2] = [[a, w], [-w, a]]
    if n % 2:
        w = np.exp(rng.uniform(np.log(lo), np.log(hi)))
        A[-1, -1] = -rng.uniform(dlo, dhi) * w

    Q, R = la.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    F = Q @ A @ Q.T
    B = rng.standard_normal((n, 1))
    C = rng.standard_normal((1, n))
    return StateSpaceModel(F, B, C)


def _thread_count() -> int:
    try:
        return max(0, int(os.environ.get("VFKIT_THREADS", "0")))
    except ValueError:
        return 0


def sample_system(
    ss: StateSpaceModel,
    points,
    noise_std: float = 0.0,
    seed: int = 0,
    with_deriv: bool = False,
) -> SampleSet:
    """Sample `ss` at `points`, optionally adding complex Gaussian noise.

    Noise for point ``i`` comes from a generator seeded by ``(seed, i)``;
    when the point set is conjugate-closed the partner of ``i`` receives the
    conjugate draw, and self-conjugate points receive real noise. The
    output therefore does not depend on evaluation order or thread count.
    Derivatives are returned noise-free.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    noise_std = float(noise_std)
    if not (noise_std >= 0 and np.isfinite(noise_std)):
        raise InvalidParam("noise_std must be finite and nonnegative")

    def evaluate(p):
        return ss_eval(ss, p, with_deriv)

    nthreads = _thread_count()
    if nthreads > 0 and pts.size > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(evaluate, pts))
    else:
        results = [evaluate(p) for p in pts]
    values = np.array([h for h, _ in results], dtype=complex)
    derivs = np.array([hp for _, hp in results], dtype=complex) if with_deriv else None

    sigma = None
    if noise_std > 0:
        scale = max(1.0, float(np.max(np.abs(pts)))) if pts.size else 1.0
        partner = conjugate_partners(pts, 1e-12 * scale)
        noise = np.zeros(pts.size, dtype=complex)
        for i in range(pts.size):
            j = i if partner is None else int(partner[i])
            base = min(i, j)
            g = np.random.default_rng([int(seed), base]).standard_normal(2)
            g *= noise_std / np.sqrt(2.0)
            if j == i and partner is not None:
                noise[i] = g[0]
            elif i == base:
                noise[i] = g[0] + 1j * g[1]
            else:
                noise[i] = g[0] - 1j * g[1]
        values = values + noise
        sigma = np.full(pts.size, noise_std)

    return SampleSet(pts, values, derivs=derivs, sigma=sigma, m_plus=moment_at_infinity(ss))
