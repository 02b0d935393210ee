"""Central finite-difference oracles and the per-problem derivative report.

These routines are intentionally independent of the analytic derivative
code paths they verify: they call only the black-box evaluators.
"""

import json
from dataclasses import dataclass

import numpy as np

from .exceptions import EvaluationError
from .penalty import dlambda_jacobian, multipliers, penalty_grad, penalty_value

__all__ = [
    "FIRST_ORDER_STEP",
    "SECOND_ORDER_STEP",
    "DerivativeReport",
    "fd_grad",
    "fd_jacobian",
    "relative_error",
    "check_problem",
    "reports_to_json",
]

FIRST_ORDER_STEP = float(np.finfo(float).eps ** (1.0 / 3.0))
SECOND_ORDER_STEP = float(np.finfo(float).eps ** 0.25)

# Per-target pass thresholds: first derivatives of analytic quantities are
# held to 1e-6, anything built from second-derivative data to 1e-4.
TOLERANCES = {
    "grad_f": 1e-6,
    "jac_h": 1e-6,
    "penalty_grad": 1e-6,
    "hess_f": 1e-4,
    "hess_h": 1e-4,
    "dlambda_jacobian": 1e-4,
}


@dataclass(frozen=True)
class DerivativeReport:
    target: str
    max_rel_err: float
    worst_point_seed: int
    step_used: float
    passed: bool

    def as_dict(self):
        return {
            "target": self.target,
            "max_rel_err": self.max_rel_err,
            "worst_point_seed": self.worst_point_seed,
            "step_used": self.step_used,
            "pass": self.passed,
        }


def fd_grad(fun, x, step=FIRST_ORDER_STEP):
    """Central-difference gradient of a scalar function.

    Uses the scaled offset step * (1 + ||x||). Raises EvaluationError on a
    non-finite stencil value.
    """
    x = np.asarray(x, dtype=float)
    delta = step * (1.0 + float(np.linalg.norm(x)))
    grad = np.empty(x.size)
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = delta
        fp = float(fun(x + e))
        fm = float(fun(x - e))
        if not np.isfinite(fp) or not np.isfinite(fm):
            raise EvaluationError("non-finite stencil value in fd_grad at coordinate %d" % j)
        grad[j] = (fp - fm) / (2.0 * delta)
    return grad


def fd_jacobian(fun, x, step=FIRST_ORDER_STEP):
    """Central-difference Jacobian of a vector function, one column at a time."""
    x = np.asarray(x, dtype=float)
    delta = step * (1.0 + float(np.linalg.norm(x)))
    cols = []
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = delta
        fp = np.asarray(fun(x + e), dtype=float).ravel()
        fm = np.asarray(fun(x - e), dtype=float).ravel()
        if not np.all(np.isfinite(fp)) or not np.all(np.isfinite(fm)):
            raise EvaluationError("non-finite stencil value in fd_jacobian at coordinate %d" % j)
        cols.append((fp - fm) / (2.0 * delta))
    return np.array(cols).T


def relative_error(a, b):
    """||a - b|| / (1 + max(||a||, ||b||)); the +1 keeps zero targets meaningful."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = np.linalg.norm(a - b)
    return float(diff / (1.0 + max(np.linalg.norm(a), np.linalg.norm(b))))


def check_problem(problem, seeds, beta=1.0):
    """Verify every analytic derivative of a problem against finite differences.

    At init_point(seed) for each seed, checks grad_f against f, hess_f
    against grad_f, jac_h against h, each constraint Hessian against its
    Jacobian row, the penalty gradient against the penalty value, and the
    multiplier Jacobian against the multipliers. Failures are reported,
    never raised.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    worst = {name: (0.0, int(seeds[0])) for name in TOLERANCES}

    def note(name, err, seed):
        if err >= worst[name][0]:
            worst[name] = (err, int(seed))

    for seed in seeds:
        x = problem.init_point(seed)
        note("grad_f", relative_error(problem.grad_f(x), fd_grad(problem.f, x)), seed)
        note(
            "hess_f",
            relative_error(problem.hess_f(x), fd_jacobian(problem.grad_f, x, SECOND_ORDER_STEP)),
            seed,
        )
        note("jac_h", relative_error(problem.jac_h(x), fd_jacobian(problem.h, x)), seed)
        if problem.hess_h is not None:
            err = 0.0
            for i in range(problem.dim_h):
                fd = fd_jacobian(lambda y, i=i: problem.jac_h(y)[i], x, SECOND_ORDER_STEP)
                err = max(err, relative_error(problem.hess_h(x, i), fd))
            note("hess_h", err, seed)
        note(
            "penalty_grad",
            relative_error(
                penalty_grad(problem, x, beta),
                fd_grad(lambda y: penalty_value(problem, y, beta), x),
            ),
            seed,
        )
        note(
            "dlambda_jacobian",
            relative_error(
                dlambda_jacobian(problem, x),
                fd_jacobian(lambda y: multipliers(problem, y)[0], x),
            ),
            seed,
        )

    steps = {
        "grad_f": FIRST_ORDER_STEP,
        "jac_h": FIRST_ORDER_STEP,
        "penalty_grad": FIRST_ORDER_STEP,
        "hess_f": SECOND_ORDER_STEP,
        "hess_h": SECOND_ORDER_STEP,
        "dlambda_jacobian": FIRST_ORDER_STEP,
    }
    reports = []
    for name, tol in TOLERANCES.items():
        if name == "hess_h" and problem.hess_h is None:
            continue
        err, seed = worst[name]
        reports.append(
            DerivativeReport(
                target=name,
                max_rel_err=err,
                worst_point_seed=seed,
                step_used=steps[name],
                passed=err <= tol,
            )
        )
    return reports


def reports_to_json(reports):
    return json.dumps([r.as_dict() for r in reports])
