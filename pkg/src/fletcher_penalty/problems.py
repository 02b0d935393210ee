"""Problem definitions: cost/constraint evaluators, region constants, built-ins.

A Problem bundles smooth evaluators for the cost f and the constraint h
together with the region constants (radius R in constraint norm, a lower
bound sigma_lb on the smallest singular value of the constraint Jacobian
over that region, and the quadratic Taylor-remainder constant c_h of h).
Built-ins cover the unit sphere (linear and Rayleigh-quotient costs), the
orthonormal-frame manifold, and Cartesian products of constraint blocks.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "RegionParams",
    "Cost",
    "Problem",
    "make_sphere",
    "make_rayleigh_sphere",
    "make_stiefel",
    "make_product",
    "linear_cost",
    "quadratic_cost",
    "zero_cost",
    "random_point_in_region",
    "builtin_problem",
    "BUILTIN_IDS",
]


@dataclass(frozen=True)
class RegionParams:
    """Constants describing the region {x : ||h(x)|| <= radius}.

    sigma_lb lower-bounds sigma_min(Dh) over the region; c_h bounds the
    quadratic Taylor remainder of h. All three must be strictly positive.
    """

    radius: float
    sigma_lb: float
    c_h: float

    def __post_init__(self):
        for name in ("radius", "sigma_lb", "c_h"):
            if not getattr(self, name) > 0:
                raise ValueError("RegionParams.%s must be strictly positive" % name)


@dataclass(frozen=True)
class Cost:
    """Bundle of cost evaluators over the ambient vector x."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Problem:
    """Smooth equality-constrained problem with explicit derivatives.

    Evaluators must be pure and reentrant; a Problem may be shared
    read-only across threads. hess_h(x, i) returns the dense Hessian of
    the i-th constraint component; it may be None for problems lacking
    second constraint derivatives (a finite-difference fallback is used
    for the multiplier Jacobian in that case).
    """

    dim_x: int
    dim_h: int
    region: RegionParams
    f: Callable[[np.ndarray], float]
    grad_f: Callable[[np.ndarray], np.ndarray]
    hess_f: Callable[[np.ndarray], np.ndarray]
    h: Callable[[np.ndarray], np.ndarray]
    jac_h: Callable[[np.ndarray], np.ndarray]
    hess_h: Optional[Callable[[np.ndarray, int], np.ndarray]]
    init_point: Callable[[int], np.ndarray]
    name: str = field(default="")

    def __post_init__(self):
        if not 1 <= self.dim_h < self.dim_x:
            raise ValueError(
                "need 1 <= dim_h < dim_x (full row rank requires m < n), got m=%d n=%d"
                % (self.dim_h, self.dim_x)
            )


def linear_cost(c):
    """f(x) = <x, c> with constant gradient and zero Hessian."""
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    return Cost(
        value=lambda x: float(x @ c),
        grad=lambda x: c.copy(),
        hess=lambda x: np.zeros((n, n)),
    )


def quadratic_cost(a):
    """f(x) = 0.5 <x, A x> for symmetric A."""
    a = np.asarray(a, dtype=float)
    a = 0.5 * (a + a.T)
    return Cost(
        value=lambda x: float(0.5 * x @ (a @ x)),
        grad=lambda x: a @ x,
        hess=lambda x: a.copy(),
    )


def zero_cost(n):
    return Cost(
        value=lambda x: 0.0,
        grad=lambda x: np.zeros(n),
        hess=lambda x: np.zeros((n, n)),
    )


# ---------------------------------------------------------------------------
# Unit sphere


def _sphere_constraint(n):
    eye2 = None

    def h(x):
        return np.array([float(x @ x) - 1.0])

    def jac(x):
        return (2.0 * x).reshape(1, n)

    def hess(x, i):
        nonlocal eye2
        if eye2 is None:
            eye2 = 2.0 * np.eye(n)
        return eye2

    return h, jac, hess


def _sphere_init(n):
    def init_point(seed):
        g = np.random.default_rng(seed).standard_normal(n)
        return g / np.linalg.norm(g)

    return init_point


def _sphere_region(radius):
    if not 0 < radius < 1:
        raise ValueError("sphere region radius must lie in (0, 1), got %r" % (radius,))
    return RegionParams(radius=radius, sigma_lb=2.0 * np.sqrt(1.0 - radius), c_h=1.0)


def make_sphere(n, w, radius=0.5):
    """Linear cost <x, w> on the unit sphere ||x||^2 = 1 in R^n.

    w must be a unit vector; this is the classic problem whose maximizer w
    separates Lagrangian-based approximate criticality from the layered
    (Riemannian) notion.
    """
    if n < 2:
        raise ValueError("sphere needs n >= 2")
    w = np.asarray(w, dtype=float).ravel()
    if w.size != n:
        raise ValueError("w has length %d, expected %d" % (w.size, n))
    if abs(np.linalg.norm(w) - 1.0) > 1e-12:
        raise ValueError("w must be a unit vector (within 1e-12)")
    h, jac, hess = _sphere_constraint(n)
    cost = linear_cost(w)
    return Problem(
        dim_x=n,
        dim_h=1,
        region=_sphere_region(radius),
        f=cost.value,
        grad_f=cost.grad,
        hess_f=cost.hess,
        h=h,
        jac_h=jac,
        hess_h=hess,
        init_point=_sphere_init(n),
        name="sphere",
    )


def make_rayleigh_sphere(a, radius=0.5):
    """Rayleigh quotient 0.5 <x, A x> on the unit sphere.

    Second-order critical points are eigenvectors of A; the global minimum
    value is half the smallest eigenvalue.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(a - a.T)) > 1e-12:
        raise ValueError("matrix must be symmetric (within 1e-12)")
    n = a.shape[0]
    if n < 2:
        raise ValueError("sphere needs n >= 2")
    h, jac, hess = _sphere_constraint(n)
    cost = quadratic_cost(a)
    return Problem(
        dim_x=n,
        dim_h=1,
        region=_sphere_region(radius),
        f=cost.value,
        grad_f=cost.grad,
        hess_f=cost.hess,
        h=h,
        jac_h=jac,
        hess_h=hess,
        init_point=_sphere_init(n),
        name="rayleigh",
    )


# ---------------------------------------------------------------------------
# Orthonormal frames X^T X = I_p


def _sym_basis(p):
    """Orthonormal basis of the symmetric p-by-p matrices (Frobenius inner product).

    Off-diagonal elements carry a 1/sqrt(2) factor so that coordinate
    2-norms of constraint values equal the Frobenius norm of X^T X - I.
    """
    m = p * (p + 1) // 2
    basis = np.zeros((m, p, p))
    k = 0
    for i in range(p):
        basis[k, i, i] = 1.0
        k += 1
        for j in range(i + 1, p):
            basis[k, i, j] = basis[k, j, i] = 1.0 / np.sqrt(2.0)
            k += 1
    return basis


def make_stiefel(n, p, cost, radius=0.5):
    """Constraint X^T X = I_p over n-by-p matrices, vectorized row-major.

    The ambient variable is x = X.ravel(); the m = p(p+1)/2 constraint
    components are Frobenius coordinates of X^T X - I_p in an orthonormal
    basis of the symmetric matrices. Any radius < 1 is admissible; the
    Jacobian's singular values then stay above 2*sqrt(1 - radius), and the
    constraint's Taylor remainder constant is exactly 1.
    """
    if not 1 <= p <= n:
        raise ValueError("need 1 <= p <= n")
    if not 0 < radius < 1:
        raise ValueError("region radius must satisfy 0 < R < 1, got %r" % (radius,))
    m = p * (p + 1) // 2
    basis = _sym_basis(p)
    dim = n * p
    eye_p = np.eye(p)

    def h(x):
        xm = x.reshape(n, p)
        s = xm.T @ xm - eye_p
        return np.einsum("kij,ij->k", basis, s)

    def jac(x):
        xm = x.reshape(n, p)
        return 2.0 * np.einsum("ai,kij->kaj", xm, basis).reshape(m, dim)

    def hess(x, k):
        return 2.0 * np.kron(np.eye(n), basis[k])

    def init_point(seed):
        g = np.random.default_rng(seed).standard_normal((n, p))
        q, r = np.linalg.qr(g)
        signs = np.sign(np.diag(r))
        signs[signs == 0] = 1.0
        return (q * signs).ravel()

    return Problem(
        dim_x=dim,
        dim_h=m,
        region=RegionParams(radius=radius, sigma_lb=2.0 * np.sqrt(1.0 - radius), c_h=1.0),
        f=cost.value,
        grad_f=cost.grad,
        hess_f=cost.hess,
        h=h,
        jac_h=jac,
        hess_h=hess,
        init_point=init_point,
        name="stiefel",
    )


# ---------------------------------------------------------------------------
# Cartesian products


def make_product(blocks, cost, name="product"):
    """Stack independent constraint blocks under a single cost.

    The combined region takes the smallest radius and sigma lower bound
    over the blocks and the largest Taylor constant; the combined Jacobian
    is block diagonal.
    """
    if not blocks:
        raise ValueError("need at least one block")
    dims = [b.dim_x for b in blocks]
    ms = [b.dim_h for b in blocks]
    x_off = np.concatenate([[0], np.cumsum(dims)])
    h_off = np.concatenate([[0], np.cumsum(ms)])
    n_total = int(x_off[-1])
    m_total = int(h_off[-1])
    region = RegionParams(
        radius=min(b.region.radius for b in blocks),
        sigma_lb=min(b.region.sigma_lb for b in blocks),
        c_h=max(b.region.c_h for b in blocks),
    )

    def split(x):
        return [x[x_off[i] : x_off[i + 1]] for i in range(len(blocks))]

    def h(x):
        return np.concatenate([b.h(xi) for b, xi in zip(blocks, split(x))])

    def jac(x):
        out = np.zeros((m_total, n_total))
        for i, (b, xi) in enumerate(zip(blocks, split(x))):
            out[h_off[i] : h_off[i + 1], x_off[i] : x_off[i + 1]] = b.jac_h(xi)
        return out

    def hess(x, i):
        blk = int(np.searchsorted(h_off, i, side="right")) - 1
        out = np.zeros((n_total, n_total))
        b = blocks[blk]
        if b.hess_h is None:
            raise ValueError("block %d has no constraint Hessian" % blk)
        sl = slice(x_off[blk], x_off[blk + 1])
        out[sl, sl] = b.hess_h(x[sl], i - int(h_off[blk]))
        return out

    def init_point(seed):
        parts = []
        for i, b in enumerate(blocks):
            child = int(np.random.SeedSequence([int(seed), i]).generate_state(1)[0])
            parts.append(b.init_point(child))
        return np.concatenate(parts)

    any_missing = any(b.hess_h is None for b in blocks)
    return Problem(
        dim_x=n_total,
        dim_h=m_total,
        region=region,
        f=cost.value,
        grad_f=cost.grad,
        hess_f=cost.hess,
        h=h,
        jac_h=jac,
        hess_h=None if any_missing else hess,
        init_point=init_point,
        name=name,
    )


# ---------------------------------------------------------------------------
# Sampling and the registry


def random_point_in_region(problem, seed, scale=0.5, fraction=0.98):
    """Seeded point with ||h(x)|| <= fraction * radius.

    Perturbs the problem's initial point along a random direction and
    halves the perturbation until the result lies inside the region.
    """
    rng = np.random.default_rng([int(seed), 0x5EED])
    x0 = problem.init_point(seed)
    v = rng.standard_normal(problem.dim_x)
    v /= np.linalg.norm(v)
    target = fraction * problem.region.radius
    t = scale
    for _ in range(80):
        cand = x0 + t * v
        if np.linalg.norm(problem.h(cand)) <= target:
            return cand
        t *= 0.5
    return x0


def _range_or_list(spec_str):
    if ".." in spec_str:
        lo, hi = spec_str.split("..")
        return np.arange(float(lo), float(hi) + 1.0)
    return np.array([float(v) for v in spec_str.split(",")])


def _seeded_linear_cost(n, seed):
    c = np.random.default_rng([int(seed), 0xC057]).standard_normal(n)
    c /= np.linalg.norm(c)
    return linear_cost(c)


BUILTIN_IDS = ("sphere", "rayleigh", "stiefel", "product:...")


def builtin_problem(problem_id, n=None, p=2, radius=0.5, seed=0, diag=None, matrix=None):
    """Resolve a string id to a built-in Problem.

    Supported ids: "sphere" (linear cost <x, e_1>), "rayleigh" (matrix from
    `diag` spec like "1..10" or a dense `matrix` array, default diag(1..n)),
    "stiefel" (seeded linear cost), and "product:<id>,<id>,..." combining
    sphere/stiefel blocks under a seeded linear cost.
    """
    if problem_id == "sphere":
        n = 5 if n is None else n
        w = np.zeros(n)
        w[0] = 1.0
        return make_sphere(n, w, radius=radius)
    if problem_id == "rayleigh":
        if matrix is not None:
            a = np.asarray(matrix, dtype=float)
        elif diag is not None:
            a = np.diag(_range_or_list(diag))
        else:
            n = 10 if n is None else n
            a = np.diag(np.arange(1.0, n + 1.0))
        return make_rayleigh_sphere(a, radius=radius)
    if problem_id == "stiefel":
        n = 8 if n is None else n
        return make_stiefel(n, p, _seeded_linear_cost(n * p, seed), radius=radius)
    if problem_id.startswith("product:"):
        block_ids = [b for b in problem_id[len("product:") :].split(",") if b]
        if not block_ids:
            raise KeyError("empty product block list in %r" % problem_id)
        blocks = []
        for bid in block_ids:
            if bid == "sphere":
                nb = 3 if n is None else n
                blocks.append(make_sphere(nb, np.eye(nb)[0], radius=radius))
            elif bid == "stiefel":
                nb = 8 if n is None else n
                blocks.append(
                    make_stiefel(nb, p, zero_cost(nb * p), radius=radius)
                )
            else:
                raise KeyError("unknown product block id %r" % bid)
        total = sum(b.dim_x for b in blocks)
        return make_product(blocks, _seeded_linear_cost(total, seed), name=problem_id)
    raise KeyError("unknown problem id %r" % problem_id)
