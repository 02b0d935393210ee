"""Dense linear-algebra primitives with explicit tolerance contracts.

Everything here is a thin, contract-checked layer over LAPACK (through
numpy.linalg). All functions are pure and deterministic within one build:
identical inputs give bitwise-identical outputs.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalFailureError

__all__ = [
    "SvdResult",
    "default_rank_tol",
    "svd",
    "pinv_apply",
    "sym_eig_min",
    "kernel_basis",
]


@dataclass(frozen=True)
class SvdResult:
    """Full SVD A = u @ diag(s) @ vt with s sorted nonincreasing.

    u is (m, m), vt is (n, n), s has min(m, n) entries. Reconstruction is
    accurate to 1e-10 * (1 + ||A||_F) in Frobenius norm.
    """

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray

    @property
    def sigma_max(self):
        return float(self.s[0]) if self.s.size else 0.0

    @property
    def sigma_min(self):
        return float(self.s[-1]) if self.s.size else 0.0


def default_rank_tol(rows, cols):
    """Numerical-rank cutoff: singular values below tol * sigma_1 count as zero."""
    return 1e-12 * max(rows, cols)


def _as_matrix(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-D array, got shape %s" % (a.shape,))
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def svd(a):
    """Full singular value decomposition of a dense matrix.

    Raises NumericalFailureError if the underlying iteration does not
    converge within LAPACK's sweep budget.
    """
    a = _as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("SVD did not converge: %s" % exc) from exc
    return SvdResult(u=u, s=s, vt=vt)


def pinv_apply(a, b, rank_tol=None):
    """Apply the Moore-Penrose pseudo-inverse: returns a_dagger @ b.

    Singular values sigma_i <= rank_tol * sigma_1 are truncated, so
    rank-deficient inputs are handled silently; the caller decides whether
    deficiency is acceptable.
    """
    a = _as_matrix(a)
    b = np.asarray(b, dtype=float)
    if rank_tol is None:
        rank_tol = default_rank_tol(*a.shape)
    if rank_tol < 0:
        raise ValueError("rank_tol must be nonnegative")
    res = svd(a)
    s = res.s
    k = s.size
    cutoff = rank_tol * (s[0] if k else 0.0)
    keep = s > cutoff
    coeffs = (res.u[:, :k].T @ b)[keep] / s[keep]
    return res.vt[:k][keep].T @ coeffs


def sym_eig_min(h):
    """Smallest eigenvalue and a unit eigenvector of the symmetrized matrix.

    The input is symmetrized as (H + H^T)/2 first; finite-difference
    Hessians carry O(step^2) asymmetry that must not reach the eigensolver.
    """
    h = _as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix, got shape %s" % (h.shape,))
    sym = 0.5 * (h + h.T)
    try:
        w, v = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("symmetric eigensolve did not converge: %s" % exc) from exc
    return float(w[0]), v[:, 0].copy()


def kernel_basis(a, rank_tol=None):
    """Orthonormal basis of the numerical kernel of a wide matrix.

    For an m-by-n input with m <= n, returns an n-by-k matrix Q whose
    columns span {v : ||A v|| <= rank_tol * sigma_1 * ||v||}; for full-rank
    A that is exactly n - m columns.
    """
    a = _as_matrix(a)
    m, n = a.shape
    if m > n:
        raise ValueError("kernel_basis expects m <= n, got shape %s" % (a.shape,))
    if rank_tol is None:
        rank_tol = default_rank_tol(m, n)
    res = svd(a)
    cutoff = rank_tol * (res.s[0] if res.s.size else 0.0)
    null_rows = [i for i in range(m) if res.s[i] <= cutoff]
    rows = null_rows + list(range(m, n))
    return res.vt[rows].T.copy()
