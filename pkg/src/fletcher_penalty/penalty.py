"""Smooth exact penalty: value, gradient, multiplier map, and beta thresholds.

The penalty is g(x) = f(x) - <h(x), lambda(x)> + beta * ||h(x)||^2 with
least-squares multipliers lambda(x) = pinv(Dh(x)^T) grad f(x). Its gradient
splits into a tangent part (the Riemannian gradient of f on the level set
of h through x) and constraint-normal parts; the Hessian is realized by
central differences of the analytic gradient, which avoids third
derivatives of f and h.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import EvaluationError, RankDeficiencyError
from .linalg import SvdResult, default_rank_tol, svd

__all__ = [
    "DEFAULT_FD_STEP",
    "PenaltyEval",
    "BetaThresholds",
    "multipliers",
    "evaluate",
    "penalty_value",
    "penalty_grad",
    "penalty_hess",
    "dlambda_jacobian",
    "beta_thresholds",
    "in_region",
]

DEFAULT_FD_STEP = float(np.finfo(float).eps ** (1.0 / 3.0))


@dataclass(frozen=True)
class PenaltyEval:
    """Cached quantities of one penalty evaluation at a point.

    Immutable after construction; independent points may be evaluated
    concurrently. grad_g is None when the evaluation was value-only.
    """

    x: np.ndarray
    beta: float
    h_val: np.ndarray
    jac: np.ndarray
    jac_svd: SvdResult
    lambda_val: np.ndarray
    g_val: float
    grad_g: Optional[np.ndarray]

    @property
    def h_norm(self):
        return float(np.linalg.norm(self.h_val))

    @property
    def grad_norm(self):
        return float(np.linalg.norm(self.grad_g))


@dataclass(frozen=True)
class BetaThresholds:
    """Pointwise lower thresholds on the penalty parameter.

    beta1 governs exactness of critical points, beta2/beta3 the
    first-order certificate inequalities; b_max is their maximum.
    """

    beta1: float
    beta2: float
    beta3: float
    b_max: float
    c_lambda: float
    sigma_min: float
    sigma_max: float


def _finite(arr, label, x):
    if not np.all(np.isfinite(arr)):
        raise EvaluationError("%s returned non-finite values at %s" % (label, x))
    return arr


def _point_data(problem, x):
    """Shared per-point bundle: h, Dh, its SVD, grad f, and multipliers."""
    x = np.asarray(x, dtype=float)
    h_val = _finite(np.asarray(problem.h(x), dtype=float).ravel(), "h", x)
    jac = _finite(np.asarray(problem.jac_h(x), dtype=float), "jac_h", x)
    grad_f = _finite(np.asarray(problem.grad_f(x), dtype=float).ravel(), "grad_f", x)
    res = svd(jac)
    m, n = jac.shape
    tol = default_rank_tol(m, n)
    if res.sigma_min <= tol * res.sigma_max:
        raise RankDeficiencyError(x, res.sigma_min, res.sigma_max)
    h_norm = float(np.linalg.norm(h_val))
    reg = problem.region
    if h_norm <= reg.radius and res.sigma_min < reg.sigma_lb * (1.0 - 1e-9):
        warnings.warn(
            "sigma_min(Dh)=%.3e dips below the declared lower bound %.3e inside "
            "the region; the supplied region constants look inconsistent"
            % (res.sigma_min, reg.sigma_lb),
            RuntimeWarning,
            stacklevel=3,
        )
    # Minimum-norm least-squares multipliers through the SVD of Dh.
    coeffs = res.vt[:m] @ grad_f
    lam = res.u @ (coeffs / res.s)
    return x, h_val, jac, res, grad_f, lam


def multipliers(problem, x):
    """Least-squares multipliers and the constraint-Jacobian SVD for reuse.

    Raises RankDeficiencyError when sigma_min(Dh) falls below the numerical
    rank cutoff, naming the offending point.
    """
    _, _, _, res, _, lam = _point_data(problem, x)
    return lam, res


def _riem_grad(grad_f, jac, lam):
    return grad_f - jac.T @ lam


def _constraint_hessians(problem, x):
    m = problem.dim_h
    n = problem.dim_x
    tensor = np.empty((m, n, n))
    for i in range(m):
        tensor[i] = problem.hess_h(x, i)
    return tensor


def _dlambda_analytic(problem, x, jac, grad_f, lam):
    # Differentiate the full-rank normal equations (Dh Dh^T) lam = Dh grad f.
    # One factorization of Dh Dh^T is shared by all coordinate directions.
    tensor = _constraint_hessians(problem, x)
    hess_f = _finite(np.asarray(problem.hess_f(x), dtype=float), "hess_f", x)
    weighted = np.einsum("l,lkj->kj", lam, tensor)
    rhs = np.einsum("ikj,k->ij", tensor, _riem_grad(grad_f, jac, lam))
    rhs += jac @ (hess_f - weighted)
    return np.linalg.solve(jac @ jac.T, rhs)


def _dlambda_fd(problem, x, step=DEFAULT_FD_STEP):
    delta = step * (1.0 + float(np.linalg.norm(x)))
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = delta
        lp, _ = multipliers(problem, x + e)
        lm, _ = multipliers(problem, x - e)
        cols.append((lp - lm) / (2.0 * delta))
    return np.array(cols).T


def dlambda_jacobian(problem, x, method="auto"):
    """Dense Jacobian of the multiplier map, one column per coordinate.

    method="analytic" differentiates the normal equations (needs hess_f and
    hess_h); "fd" falls back to central differences of the multipliers;
    "auto" picks analytic whenever constraint Hessians are available.
    """
    x, _, jac, _, grad_f, lam = _point_data(problem, x)
    if method == "auto":
        method = "fd" if problem.hess_h is None else "analytic"
    if method == "analytic":
        if problem.hess_h is None:
            raise ValueError("problem has no constraint Hessians; use method='fd'")
        return _dlambda_analytic(problem, x, jac, grad_f, lam)
    if method == "fd":
        return _dlambda_fd(problem, x)
    raise ValueError("unknown method %r" % (method,))


def evaluate(problem, x, beta, with_grad=True):
    """Build a PenaltyEval at x; the Dh SVD is computed once and shared."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    x, h_val, jac, res, grad_f, lam = _point_data(problem, x)
    g_val = float(problem.f(x)) - float(h_val @ lam) + beta * float(h_val @ h_val)
    grad_g = None
    if with_grad:
        dlam = _dlambda_analytic(problem, x, jac, grad_f, lam) if problem.hess_h is not None \
            else _dlambda_fd(problem, x)
        grad_g = _riem_grad(grad_f, jac, lam) + 2.0 * beta * (jac.T @ h_val) - dlam.T @ h_val
    return PenaltyEval(
        x=x,
        beta=float(beta),
        h_val=h_val,
        jac=jac,
        jac_svd=res,
        lambda_val=lam,
        g_val=g_val,
        grad_g=grad_g,
    )


def penalty_value(problem, x, beta):
    """g(x) = f(x) - <h(x), lambda(x)> + beta ||h(x)||^2."""
    return evaluate(problem, x, beta, with_grad=False).g_val


def penalty_grad(problem, x, beta):
    """Analytic gradient of the penalty.

    Assembled as the layered Riemannian gradient of f plus the two
    constraint-normal terms 2*beta*Dh^T h and -(Dlambda)^T h.
    """
    return evaluate(problem, x, beta, with_grad=True).grad_g


def penalty_hess(problem, x, beta, fd_step=DEFAULT_FD_STEP):
    """Symmetrized central-difference Jacobian of the analytic gradient.

    Every stencil point must admit multipliers; a rank-deficient stencil
    point raises and the caller may shrink fd_step and retry.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    delta = fd_step * (1.0 + float(np.linalg.norm(x)))
    hess = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = delta
        gp = penalty_grad(problem, x + e, beta)
        gm = penalty_grad(problem, x - e, beta)
        hess[:, j] = (gp - gm) / (2.0 * delta)
    return 0.5 * (hess + hess.T)


def beta_thresholds(problem, x):
    """Pointwise beta thresholds from the Jacobian SVD and the multiplier map."""
    x, _, jac, res, grad_f, lam = _point_data(problem, x)
    dlam = _dlambda_analytic(problem, x, jac, grad_f, lam) if problem.hess_h is not None \
        else _dlambda_fd(problem, x)
    c_lambda = svd(dlam).sigma_max
    s_min = res.sigma_min
    s_max = res.sigma_max
    beta1 = s_max * c_lambda / (2.0 * s_min**2)
    beta2 = c_lambda / s_min
    beta3 = 1.0 / s_min
    return BetaThresholds(
        beta1=beta1,
        beta2=beta2,
        beta3=beta3,
        b_max=max(beta1, beta2, beta3),
        c_lambda=c_lambda,
        sigma_min=s_min,
        sigma_max=s_max,
    )


def in_region(problem, x):
    """True iff ||h(x)|| <= radius (boundary included)."""
    h_val = np.asarray(problem.h(np.asarray(x, dtype=float)), dtype=float)
    return bool(np.linalg.norm(h_val) <= problem.region.radius)
