"""Shared fixtures: built-in problems and small synthetic toys for edge cases."""

import numpy as np
import pytest

from fletcher_penalty import (
    Problem,
    RegionParams,
    builtin_problem,
    quadratic_cost,
)


@pytest.fixture(scope="session")
def sphere5():
    return builtin_problem("sphere", n=5)


@pytest.fixture(scope="session")
def rayleigh10():
    return builtin_problem("rayleigh", n=10)


@pytest.fixture(scope="session")
def stiefel83():
    return builtin_problem("stiefel", n=8, p=3, seed=0)


@pytest.fixture(scope="session")
def product_spheres():
    return builtin_problem("product:sphere,sphere", n=3, seed=0)


@pytest.fixture(scope="session")
def builtins(sphere5, rayleigh10, stiefel83, product_spheres):
    return {
        "sphere": sphere5,
        "rayleigh": rayleigh10,
        "stiefel": stiefel83,
        "product": product_spheres,
    }


def make_affine_toy(n=5, m=2, seed=0, radius=2.0, definite=True):
    """Quadratic cost with a full-rank affine constraint h(x) = A(x - base).

    The constraint's Taylor remainder is identically zero, its Jacobian is
    constant, and the multiplier map is affine, so every penalty quantity
    has a closed form; used for exactness tests.
    """
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    base = rng.standard_normal(n)
    q = rng.standard_normal((n, n))
    q, _ = np.linalg.qr(q)
    eigs = rng.uniform(0.5, 3.0, size=n) if definite else np.linspace(-1.0, 3.0, n)
    p_mat = q @ np.diag(eigs) @ q.T
    p_mat = 0.5 * (p_mat + p_mat.T)
    cost = quadratic_cost(p_mat)
    sigma_min = np.linalg.svd(a, compute_uv=False)[-1]

    def init_point(seed_):
        step = np.random.default_rng(seed_).standard_normal(n)
        step *= 0.2 / np.linalg.norm(step)
        return base + step

    return Problem(
        dim_x=n,
        dim_h=m,
        region=RegionParams(radius=radius, sigma_lb=0.99 * sigma_min, c_h=1.0),
        f=cost.value,
        grad_f=cost.grad,
        hess_f=cost.hess,
        h=lambda x: a @ (x - base),
        jac_h=lambda x: a.copy(),
        hess_h=lambda x, i: np.zeros((n, n)),
        init_point=init_point,
        name="affine-toy",
    ), a, base, p_mat


def make_saddle_toy():
    """Kernel direction e_1 carries curvature -1; the constrained block is convex.

    h pins coordinates 2 and 3, so x = 0 is feasible with zero penalty
    gradient and a pure negative-curvature direction along e_1.
    """
    a = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    p_mat = np.diag([-1.0, 1.0, 1.0])
    cost = quadratic_cost(p_mat)
    return Problem(
        dim_x=3,
        dim_h=2,
        region=RegionParams(radius=5.0, sigma_lb=1.0, c_h=1.0),
        f=cost.value,
        grad_f=cost.grad,
        hess_f=cost.hess,
        h=lambda x: a @ x,
        jac_h=lambda x: a.copy(),
        hess_h=lambda x, i: np.zeros((3, 3)),
        init_point=lambda seed: np.zeros(3),
        name="saddle-toy",
    )


def make_rank_crossing_toy():
    """Jacobian collapses to zero once the free coordinate x_2 drops below 0.25.

    The cost pulls x_2 from 0.3 toward -1 along the constraint's kernel, so
    gradient steps must cross the threshold. Synthetic error-path fixture:
    the evaluators are not a consistent derivative family, they only
    exercise the rank-deficiency handling.
    """
    n = 3

    def jac(x):
        row = np.zeros((1, n))
        row[0, 0] = 0.1 if x[1] > 0.25 else 0.0
        return row

    target = np.array([0.5, -1.0, 0.0])
    return Problem(
        dim_x=n,
        dim_h=1,
        region=RegionParams(radius=1.0, sigma_lb=0.1, c_h=1.0),
        f=lambda x: 0.5 * float((x - target) @ (x - target)),
        grad_f=lambda x: x - target,
        hess_f=lambda x: np.eye(n),
        h=lambda x: np.array([0.1 * x[0]]),
        jac_h=jac,
        hess_h=lambda x, i: np.zeros((n, n)),
        init_point=lambda seed: np.array([0.5, 0.3, 0.2]),
        name="rank-crossing-toy",
    )
