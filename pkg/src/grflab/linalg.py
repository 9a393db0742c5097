"""Small dense symmetric eigensolver and guarded pseudo-inverse solves.

The eigensolver is a cyclic-by-row Jacobi iteration.  It is slower than
LAPACK but deterministic, dependency-free in the hot path, and exact enough
for the matrix sizes used here (Gram and jet covariance matrices, side at
most a few hundred).  A sweep rotates every off-diagonal pair (p, q) in a
fixed order; iteration stops when the off-diagonal Frobenius mass drops
below ``rel_tol`` times the Frobenius norm of the input.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit, numba_enabled
from .exceptions import IllConditionedError

_DEFAULT_REL_TOL = 1e-12
_MAX_SWEEPS = 60


@njit(cache=True)
def _jacobi_nb(A, V, off_tol, max_sweeps):
    n = A.shape[0]
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * A[i, j] * A[i, j]
        if np.sqrt(off) <= off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq


def _jacobi_np(A, V, off_tol, max_sweeps):
    n = A.shape[0]
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                akp = A[:, p].copy()
                akq = A[:, q].copy()
                A[:, p] = c * akp - s * akq
                A[:, q] = s * akp + c * akq
                apk = A[p, :].copy()
                aqk = A[q, :].copy()
                A[p, :] = c * apk - s * aqk
                A[q, :] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                vkp = V[:, p].copy()
                vkq = V[:, q].copy()
                V[:, p] = c * vkp - s * vkq
                V[:, q] = s * vkp + c * vkq


def eigh_jacobi(A: np.ndarray, rel_tol: float = _DEFAULT_REL_TOL,
                max_sweeps: int = _MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ``w`` ascending and orthonormal
    columns ``V`` so that ``A = V @ diag(w) @ V.T``.
    """
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    n = A.shape[0]
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    norm = np.sqrt(np.sum(A * A))
    V = np.eye(n)
    if norm > 0.0:
        off_tol = rel_tol * norm
        if numba_enabled():
            _jacobi_nb(A, V, off_tol, max_sweeps)
        else:
            _jacobi_np(A, V, off_tol, max_sweeps)
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def eig_bounds(A: np.ndarray) -> tuple[float, float]:
    """(min, max) eigenvalue of a symmetric matrix."""
    w, _ = eigh_jacobi(A)
    if w.size == 0:
        return 0.0, 0.0
    return float(w[0]), float(w[-1])


def solve_psd_pinv(A: np.ndarray, b: np.ndarray, cond_limit: float = 1e12,
                   cutoff_rel: float = 1e-12) -> np.ndarray:
    """Solve ``A x = b`` for symmetric PSD ``A`` through its eigensystem.

    Eigenvalues below ``cutoff_rel * max_eig`` are treated as exact zeros
    (pseudo-inverse).  If the full-spectrum condition estimate
    ``max_eig / min_eig`` exceeds ``cond_limit`` the solve is refused with
    :class:`IllConditionedError`: the caller gets a report instead of a
    guess.
    """
    w, V = eigh_jacobi(A)
    if w.size == 0:
        return np.zeros_like(np.asarray(b, dtype=np.float64))
    wmax = float(w[-1])
    wmin = float(w[0])
    if wmax <= 0.0:
        raise IllConditionedError("matrix is zero or not positive semidefinite")
    cond = np.inf if wmin <= 0.0 else wmax / wmin
    if cond > cond_limit:
        raise IllConditionedError(
            f"condition estimate {cond:.3e} exceeds limit {cond_limit:.1e}")
    inv = np.where(w > cutoff_rel * wmax, 1.0 / np.where(w > 0, w, 1.0), 0.0)
    return V @ (inv * (V.T @ np.asarray(b, dtype=np.float64)))
