"""Dense symmetric linear algebra kernels.

Everything downstream (Schur complements, preconditioners, spectra) is built
on the routines in this module. Matrices are plain numpy arrays; symmetric
matrices are expected to be exactly symmetric (callers symmetrize on
construction). The eigensolver is cyclic Jacobi: unconditionally convergent
for symmetric input and simple to certify. Problem sizes are desk scale
(n up to a few hundred), so everything is dense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import EigenConvergenceError, NotPositiveDefinite

# Off-diagonal Frobenius threshold relative to ||a||_F and the sweep budget
# of the cyclic Jacobi iteration.
JACOBI_TOL = 1e-13
JACOBI_SWEEPS = 30


def _as_float(a: np.ndarray) -> np.ndarray:
    """Coerce to a floating dtype, preserving extended precision when given."""
    a = np.asarray(a)
    if not np.issubdtype(a.dtype, np.floating):
        a = a.astype(float)
    return a


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return the symmetric part 0.5*(a + a^T)."""
    a = _as_float(a)
    return 0.5 * (a + a.T)


def require_symmetric(a: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    a = _as_float(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.abs(a).max(initial=0.0), 1.0)
    if a.size and np.abs(a - a.T).max() > rtol * scale:
        raise ValueError("matrix is not symmetric")
    return a


@dataclass(frozen=True)
class CholFactor:
    """Lower-triangular factor L with A = L L^T; diag(L) > 0."""

    n: int
    lower: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.T


def cholesky(a: np.ndarray) -> CholFactor:
    """Factor a symmetric matrix as L L^T.

    Raises NotPositiveDefinite when a pivot falls at or below
    n * eps * max(initial diagonal); the tolerance is scale invariant and
    deterministic, and doubles as the positive-definiteness test used by
    the coarse-space sufficiency check.
    """
    a = require_symmetric(a)
    n = a.shape[0]
    lower = np.zeros((n, n), dtype=a.dtype)
    max_diag = a.diagonal().max(initial=0.0)
    tol = n * np.finfo(a.dtype).eps * max_diag
    for j in range(n):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= tol:
            raise NotPositiveDefinite(j, pivot)
        ljj = np.sqrt(pivot)
        lower[j, j] = ljj
        if j + 1 < n:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / ljj
    return CholFactor(n, lower)


def chol_solve(f: CholFactor, b: np.ndarray) -> np.ndarray:
    """Solve A x = b given A = L L^T. Accepts vector or matrix right-hand sides."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != f.n:
        raise ValueError(f"dimension mismatch: factor is {f.n}, rhs has {b.shape[0]} rows")
    if f.n == 0:
        return b.copy()
    y = tri_solve(f.lower, b, lower=True)
    return tri_solve(f.lower.T, y, lower=False)


def tri_solve(t: np.ndarray, b: np.ndarray, lower: bool) -> np.ndarray:
    """Triangular solve that keeps extended-precision inputs in extended
    precision; float64 goes through the LAPACK-backed fast path."""
    dtype = np.result_type(t.dtype, np.asarray(b).dtype)
    if dtype == np.float64:
        return solve_triangular(t, b, lower=lower)
    n = t.shape[0]
    t = t.astype(dtype, copy=False)
    x = np.array(b, dtype=dtype, copy=True)
    rows = range(n) if lower else range(n - 1, -1, -1)
    for i in rows:
        if lower:
            x[i] -= t[i, :i] @ x[:i]
        else:
            x[i] -= t[i, i + 1 :] @ x[i + 1 :]
        x[i] /= t[i, i]
    return x


def is_spd(a: np.ndarray) -> bool:
    try:
        cholesky(a)
    except NotPositiveDefinite:
        return False
    return True


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    if apq == 0.0:
        return
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    if abs(theta) > 1e10:
        # asymptotic tangent; avoids overflow in theta * theta
        t = 0.5 / theta
    elif theta >= 0.0:
        t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
    else:
        t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    for mat in (a,):
        col_p = mat[:, p].copy()
        col_q = mat[:, q].copy()
        mat[:, p] = c * col_p - s * col_q
        mat[:, q] = s * col_p + c * col_q
        row_p = mat[p, :].copy()
        row_q = mat[q, :].copy()
        mat[p, :] = c * row_p - s * row_q
        mat[q, :] = s * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    col_p = v[:, p].copy()
    col_q = v[:, q].copy()
    v[:, p] = c * col_p - s * col_q
    v[:, q] = s * col_p + c * col_q


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(a.diagonal())
    return float(np.linalg.norm(off))


def sym_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    Cyclic Jacobi with a fixed sweep budget; raises EigenConvergenceError with
    the residual off-diagonal norm if the budget is exhausted.
    """
    a = require_symmetric(a)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    work = a.copy()
    vecs = np.eye(n, dtype=a.dtype)
    norm = float(np.linalg.norm(a))
    threshold = JACOBI_TOL * norm
    if norm == 0.0:
        return np.zeros(n, dtype=a.dtype), vecs
    for _ in range(JACOBI_SWEEPS):
        if _off_norm(work) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(work, vecs, p, q)
    else:
        off = _off_norm(work)
        if off > threshold:
            raise EigenConvergenceError(off, threshold, JACOBI_SWEEPS)
    values = work.diagonal().copy()
    order = np.argsort(values, kind="stable")
    return values[order], vecs[:, order]


def gen_eig_spd(m: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Eigenvalues (real, ascending) of the product operator m @ k.

    m must be symmetric PSD and k SPD; the spectrum is obtained from the
    symmetric similarity transform L^T m L with k = L L^T, so no complex
    arithmetic is ever needed.
    """
    m = require_symmetric(m)
    f = cholesky(k)
    if f.n == 0:
        return np.zeros(0)
    c = symmetrize(f.lower.T @ m @ f.lower)
    values, _ = sym_eig(c)
    return values


def energy_op_norm_sq(p: np.ndarray, s: np.ndarray) -> float:
    """Squared operator norm of p in the energy norm induced by SPD s.

    Returns max_{v != 0} ||p v||_s^2 / ||v||_s^2, computed as the largest
    eigenvalue of G^T G with G = L^T p L^{-T} and s = L L^T.
    """
    p = _as_float(p)
    f = cholesky(s)
    if f.n == 0:
        return 0.0
    if p.shape != (f.n, f.n):
        raise ValueError(f"operator shape {p.shape} does not match space dimension {f.n}")
    # G = L^T p L^{-T}; y = L^{-1} p^T so that G = L^T y^T
    y = tri_solve(f.lower, p.T, lower=True)
    g = f.lower.T @ y.T
    values, _ = sym_eig(symmetrize(g.T @ g))
    return float(max(values[-1], 0.0))
