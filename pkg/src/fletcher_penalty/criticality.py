"""Layered-manifold criticality measures and certificates.

Every point x with full-rank constraint Jacobian sits on the level set
{y : h(y) = h(x)}, a smooth submanifold. Criticality of f is measured on
that layer: gradient projected to ker Dh(x), Hessian of f minus the
multiplier-weighted constraint Hessians reduced to an orthonormal kernel
basis. A certificate compares the measured quantities against target
tolerances; the competing Lagrangian-based check is provided for
comparison with user-supplied multipliers.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .linalg import kernel_basis, sym_eig_min
from .penalty import _constraint_hessians, _point_data, _riem_grad

__all__ = [
    "LayeredQuantities",
    "CriticalityCertificate",
    "layered_grad",
    "layered_hess",
    "certify",
    "lagrangian_check",
]


@dataclass(frozen=True)
class LayeredQuantities:
    """Riemannian gradient/Hessian data of f on the layer through x."""

    h_norm: float
    riem_grad: np.ndarray
    riem_grad_norm: float
    tangent_basis: np.ndarray
    reduced_hess: np.ndarray
    min_eig: float
    min_eig_vec: np.ndarray


@dataclass(frozen=True)
class CriticalityCertificate:
    """Measured criticality quantities against (eps0, eps1, eps2) targets.

    eps2_measured is max(0, -min_eig) so certificates are monotone in the
    targets; it is None when the Hessian check was skipped (eps2 infinite).
    Ties at exact equality pass (non-strict comparisons).
    """

    eps0_measured: float
    eps1_measured: float
    eps2_measured: Optional[float]
    targets: Tuple[float, float, float]
    focp_pass: bool
    socp_pass: bool

    def as_dict(self):
        eps2_target = self.targets[2]
        return {
            "eps0_measured": self.eps0_measured,
            "eps1_measured": self.eps1_measured,
            "eps2_measured": self.eps2_measured,
            "targets": [
                self.targets[0],
                self.targets[1],
                None if math.isinf(eps2_target) else eps2_target,
            ],
            "focp_pass": self.focp_pass,
            "socp_pass": self.socp_pass,
        }

    def to_json(self):
        return json.dumps(self.as_dict())


def layered_grad(problem, x):
    """Gradient of f projected onto ker Dh(x): grad f - Dh^T lambda."""
    _, _, jac, _, grad_f, lam = _point_data(problem, x)
    return _riem_grad(grad_f, jac, lam)


def _weighted_hessian(problem, x, lam):
    hess = np.asarray(problem.hess_f(x), dtype=float).copy()
    if problem.hess_h is not None:
        tensor = _constraint_hessians(problem, x)
        hess -= np.einsum("l,lkj->kj", lam, tensor)
    else:
        raise ValueError("layered Hessian needs constraint Hessians (hess_h is None)")
    return hess


def layered_hess(problem, x):
    """Layered Riemannian gradient and reduced Hessian at x.

    The reduced Hessian is Q^T (hess f - sum_i lambda_i hess h_i) Q for an
    orthonormal kernel basis Q of Dh(x); its smallest eigenpair is lifted
    back to the ambient space through Q.
    """
    x, h_val, jac, _, grad_f, lam = _point_data(problem, x)
    rg = _riem_grad(grad_f, jac, lam)
    q = kernel_basis(jac)
    reduced = q.T @ _weighted_hessian(problem, x, lam) @ q
    reduced = 0.5 * (reduced + reduced.T)
    min_eig, vec = sym_eig_min(reduced)
    return LayeredQuantities(
        h_norm=float(np.linalg.norm(h_val)),
        riem_grad=rg,
        riem_grad_norm=float(np.linalg.norm(rg)),
        tangent_basis=q,
        reduced_hess=reduced,
        min_eig=min_eig,
        min_eig_vec=q @ vec,
    )


def certify(problem, x, eps0, eps1, eps2):
    """Measure layered criticality at x and compare against the targets.

    eps2 = inf skips the Hessian measurement; the second-order flag then
    reduces to the first-order one.
    """
    if math.isinf(eps2):
        _, h_val, jac, _, grad_f, lam = _point_data(problem, x)
        eps0_m = float(np.linalg.norm(h_val))
        eps1_m = float(np.linalg.norm(_riem_grad(grad_f, jac, lam)))
        focp = eps0_m <= eps0 and eps1_m <= eps1
        return CriticalityCertificate(
            eps0_measured=eps0_m,
            eps1_measured=eps1_m,
            eps2_measured=None,
            targets=(eps0, eps1, eps2),
            focp_pass=focp,
            socp_pass=focp,
        )
    lq = layered_hess(problem, x)
    focp = lq.h_norm <= eps0 and lq.riem_grad_norm <= eps1
    return CriticalityCertificate(
        eps0_measured=lq.h_norm,
        eps1_measured=lq.riem_grad_norm,
        eps2_measured=max(0.0, -lq.min_eig),
        targets=(eps0, eps1, eps2),
        focp_pass=focp,
        socp_pass=focp and lq.min_eig >= -eps2,
    )


def lagrangian_check(problem, x, lam, eps0, eps1, eps2):
    """Lagrangian-based approximate criticality with user-supplied multipliers.

    First flag: ||h|| <= eps0 and ||grad f - Dh^T lam|| <= eps1. Second
    flag: additionally the Lagrangian Hessian restricted to ker Dh(x) is
    bounded below by -eps2. Works for any lam; no rank requirement beyond
    what the kernel basis tolerates.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float).ravel()
    h_val = np.asarray(problem.h(x), dtype=float).ravel()
    jac = np.asarray(problem.jac_h(x), dtype=float)
    grad_l = np.asarray(problem.grad_f(x), dtype=float).ravel() - jac.T @ lam
    first = bool(np.linalg.norm(h_val) <= eps0 and np.linalg.norm(grad_l) <= eps1)
    if not first:
        return False, False
    if math.isinf(eps2):
        return True, True
    q = kernel_basis(jac)
    reduced = q.T @ _weighted_hessian(problem, x, lam) @ q
    min_eig, _ = sym_eig_min(reduced)
    return True, bool(min_eig >= -eps2)
