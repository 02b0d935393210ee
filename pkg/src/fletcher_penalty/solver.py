"""Penalty minimization: alternating gradient steps and negative-curvature steps.

The main loop takes Armijo-backtracked gradient steps while the penalty
gradient is large, and unit-norm eigensteps along the most negative
Hessian direction once it is small; both backtrackings additionally force
the next iterate to keep ||h|| <= radius. An outer plateau scheme reruns
the loop with geometrically growing penalty parameter and quartically
growing iteration budgets when no valid penalty parameter is known ahead
of time. A fourth-order integrator for the constraint-violation gradient
flow provides feasibility restoration.
"""

import json
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .criticality import CriticalityCertificate, certify
from .exceptions import (
    BacktrackFailureError,
    NumericalFailureError,
    PlateauLimitError,
    RankDeficiencyError,
    StepSizeError,
)
from .linalg import sym_eig_min
from .penalty import (
    DEFAULT_FD_STEP,
    beta_thresholds,
    evaluate,
    in_region,
    penalty_hess,
    penalty_value,
)

__all__ = [
    "SolverConfig",
    "IterationRecord",
    "PlateauStage",
    "RunTrace",
    "region_step_floors",
    "gradient_backtrack",
    "eigen_backtrack",
    "gradient_eigenstep",
    "plateau",
    "restore_feasibility",
]


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, line-search constants, and budgets for one solve.

    eps2 = inf turns off eigensteps (pure first-order variant). The
    line-search defaults are conventional; the theory only constrains the
    open intervals (c1 in (0,1), c2 in (0,1/2), shrink factors in (0,1)).
    """

    eps1: float = 1e-5
    eps2: float = math.inf
    beta: float = 1.0
    c1: float = 1e-4
    c2: float = 0.4
    tau1: float = 0.5
    tau2: float = 0.5
    alpha01: float = 1.0
    alpha02: float = 1.0
    max_iters: int = 20000
    max_backtracks: int = 60
    fd_step: float = DEFAULT_FD_STEP

    def validate(self):
        if not self.eps1 > 0:
            raise ValueError("eps1 must be positive")
        if not self.eps2 > 0:
            raise ValueError("eps2 must be positive (inf allowed)")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 < self.c1 < 1:
            raise ValueError("c1 must lie in (0, 1)")
        if not 0 < self.c2 < 0.5:
            raise ValueError("c2 must lie in (0, 1/2)")
        if not 0 < self.tau1 < 1 or not 0 < self.tau2 < 1:
            raise ValueError("shrink factors must lie in (0, 1)")
        if not self.alpha01 > 0 or not self.alpha02 > 0:
            raise ValueError("initial step sizes must be positive")
        if self.max_iters < 0 or self.max_backtracks < 0:
            raise ValueError("iteration budgets must be nonnegative")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")

    def as_dict(self):
        return {
            "eps1": self.eps1,
            "eps2": None if math.isinf(self.eps2) else self.eps2,
            "beta": self.beta,
            "c1": self.c1,
            "c2": self.c2,
            "tau1": self.tau1,
            "tau2": self.tau2,
            "alpha01": self.alpha01,
            "alpha02": self.alpha02,
            "max_iters": self.max_iters,
            "max_backtracks": self.max_backtracks,
            "fd_step": self.fd_step,
        }


@dataclass(frozen=True)
class IterationRecord:
    """One accepted step (or the terminal point) of a solve."""

    k: int
    kind: str  # "gradient" | "eigen" | "terminal"
    step_len: float
    g_before: float
    g_after: float
    grad_norm: float
    h_norm: float
    curvature: Optional[float]
    backtracks: int

    def as_dict(self):
        out = {
            "k": self.k,
            "kind": self.kind,
            "step_len": self.step_len,
            "g_before": self.g_before,
            "g_after": self.g_after,
            "grad_norm": self.grad_norm,
            "h_norm": self.h_norm,
        }
        if self.curvature is not None:
            out["curvature"] = self.curvature
        out["backtracks"] = self.backtracks
        return out


@dataclass(frozen=True)
class PlateauStage:
    """Bookkeeping for one constant-beta stretch of the plateau scheme."""

    index: int
    beta: float
    lp: float
    iters: int
    stop_reason: str  # "converged" | "b_trigger" | "budget" | "backtrack_failure"
    b_value: Optional[float]

    def as_dict(self):
        return {
            "index": self.index,
            "beta": self.beta,
            "lp": self.lp,
            "iters": self.iters,
            "stop_reason": self.stop_reason,
            "b_value": self.b_value,
        }


@dataclass
class RunTrace:
    """Per-iteration records plus the final point and its certificate.

    termination is one of "converged", "max_iters", "rank_deficient",
    "beta_too_small". Plateau runs additionally carry the per-plateau
    schedule; their records concatenate all inner runs (the k index
    restarts at each plateau).
    """

    config: SolverConfig
    records: List[IterationRecord]
    final_x: np.ndarray
    final_certificate: Optional[CriticalityCertificate]
    termination: str
    plateaus: Optional[List[PlateauStage]] = field(default=None)

    def iteration_counts(self):
        grad = sum(1 for r in self.records if r.kind == "gradient")
        eig = sum(1 for r in self.records if r.kind == "eigen")
        return grad + eig, grad, eig

    def as_dict(self):
        out = {
            "config": self.config.as_dict(),
            "records": [r.as_dict() for r in self.records],
            "final_x": [float(v) for v in np.asarray(self.final_x).ravel()],
            "certificate": None
            if self.final_certificate is None
            else self.final_certificate.as_dict(),
            "termination": self.termination,
        }
        if self.plateaus is not None:
            out["plateaus"] = [s.as_dict() for s in self.plateaus]
        return out

    def to_json(self):
        return json.dumps(self.as_dict())


def region_step_floors(problem, x, beta):
    """Step lengths below which steps provably stay inside the region.

    Returns (grad_floor, unit_floor). When beta exceeds the first pointwise
    threshold, x - t * grad g(x) keeps ||h|| <= radius for every
    0 <= t <= grad_floor. For any unit direction d, x + t * d stays inside
    for 0 <= t <= unit_floor provided the penalty gradient at x is small
    (at most radius/2, which pins the violation itself down). grad_floor
    may come out nonpositive when beta is too small; callers should treat
    that as "no guarantee".
    """
    th = beta_thresholds(problem, x)
    ev = evaluate(problem, x, beta, with_grad=True)
    grad_norm = ev.grad_norm
    radius = problem.region.radius
    c_h = problem.region.c_h
    s1 = th.sigma_max
    terms = [1.0 / (2.0 * beta * s1 * s1)]
    if grad_norm > 0.0:
        terms.append(math.sqrt(radius / (2.0 * c_h)) / grad_norm)
        terms.append(
            (2.0 * beta * th.sigma_min**2 - s1 * th.c_lambda)
            * radius
            / (2.0 * c_h * grad_norm**2)
        )
    unit_floor = (-s1 + math.sqrt(s1 * s1 + 2.0 * c_h * radius)) / (2.0 * c_h)
    return min(terms), unit_floor


def gradient_backtrack(problem, x, beta, grad_g, cfg, g_x=None):
    """First member of {alpha01 * tau1^j} passing Armijo decrease and the region test.

    Returns (alpha, x_next, backtracks). Raises BacktrackFailureError once
    the trial budget is exhausted, which signals that beta is likely below
    the pointwise exactness threshold (or numerical trouble).
    """
    x = np.asarray(x, dtype=float)
    grad_g = np.asarray(grad_g, dtype=float)
    if g_x is None:
        g_x = penalty_value(problem, x, beta)
    gnorm_sq = float(grad_g @ grad_g)
    radius = problem.region.radius
    alpha = cfg.alpha01
    for j in range(cfg.max_backtracks + 1):
        x_next = x - alpha * grad_g
        if np.linalg.norm(problem.h(x_next)) <= radius:
            g_next = penalty_value(problem, x_next, beta)
            if g_x - g_next >= cfg.c1 * alpha * gnorm_sq:
                return alpha, x_next, j
        alpha *= cfg.tau1
    raise BacktrackFailureError(
        "no acceptable gradient step within %d backtracks" % cfg.max_backtracks
    )


def eigen_backtrack(problem, x, beta, d, hess_quad, cfg, g_x=None):
    """First member of {alpha02 * tau2^j} passing curvature decrease and the region test.

    d must be a unit vector with <d, grad g(x)> <= 0 and hess_quad the
    (negative) curvature <d, hess g(x) d>. Returns (alpha, x_next, backtracks).
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if g_x is None:
        g_x = penalty_value(problem, x, beta)
    radius = problem.region.radius
    alpha = cfg.alpha02
    for j in range(cfg.max_backtracks + 1):
        x_next = x + alpha * d
        if np.linalg.norm(problem.h(x_next)) <= radius:
            g_next = penalty_value(problem, x_next, beta)
            if g_x - g_next >= -cfg.c2 * alpha * alpha * hess_quad:
                return alpha, x_next, j
        alpha *= cfg.tau2
    raise BacktrackFailureError(
        "no acceptable eigenstep within %d backtracks" % cfg.max_backtracks
    )


def _assert_first_order_bounds(problem, x, cert, cfg):
    """Termination sanity: first-order certificate inequalities at the final point.

    With beta above the pointwise thresholds, a small penalty gradient
    forces small ||h|| and small layered gradient; violation indicates a
    broken gradient computation, so it raises rather than passing silently.
    """
    th = beta_thresholds(problem, x)
    if cfg.beta <= max(th.beta2, th.beta3):
        return
    bound_h = cfg.eps1 / (cfg.beta * th.sigma_min)
    bound_g = (1.0 + th.c_lambda / (cfg.beta * th.sigma_min)) * cfg.eps1
    slack = 1e-9 * (1.0 + cfg.eps1)
    if cert.eps0_measured > bound_h + slack or cert.eps1_measured > bound_g + slack:
        raise NumericalFailureError(
            "first-order certificate bounds violated at termination: "
            "||h||=%.3e (bound %.3e), ||grad_M f||=%.3e (bound %.3e)"
            % (cert.eps0_measured, bound_h, cert.eps1_measured, bound_g)
        )


def _finalize(problem, cfg, records, ev, reason, k):
    records = list(records)
    records.append(
        IterationRecord(
            k=k,
            kind="terminal",
            step_len=0.0,
            g_before=ev.g_val,
            g_after=ev.g_val,
            grad_norm=ev.grad_norm,
            h_norm=ev.h_norm,
            curvature=None,
            backtracks=0,
        )
    )
    try:
        cert = certify(problem, ev.x, cfg.eps1, 2.0 * cfg.eps1, cfg.eps2)
    except RankDeficiencyError:
        cert = None
    if reason == "converged" and cert is not None:
        _assert_first_order_bounds(problem, ev.x, cert, cfg)
    return RunTrace(
        config=cfg,
        records=records,
        final_x=ev.x,
        final_certificate=cert,
        termination=reason,
    )


def gradient_eigenstep(problem, x0, cfg, _stop_check=None):
    """Minimize the penalty until its gradient and (optionally) curvature tolerances hold.

    Takes gradient steps while ||grad g|| > eps1; otherwise, with finite
    eps2, measures the smallest Hessian eigenvalue and either takes an
    eigenstep (direction sign-flipped so it is non-ascending) or returns.
    The final point carries a layered criticality certificate with targets
    (eps1, 2*eps1, eps2).

    _stop_check(k, ev) is an optional stopping criterion evaluated once per
    accepted iterate before anything else; a non-None tag ends the run with
    that tag as termination (used by the plateau scheme).

    Worst-case accounting (documentation only): every accepted gradient
    step decreases g by at least c1 * alpha * eps1^2 and every eigenstep by
    at least c2 * alpha^2 * eps2, with alpha bounded below through the
    region floors (region_step_floors) and regionwide curvature bounds.
    Dividing the initial gap g(x0) - inf g by those decreases gives
    iteration counts scaling like eps1^-2 and eps2^-3; the curvature bounds
    are unobservable suprema, so the library never evaluates the count and
    instead records each step's decrease in the trace for replay.
    """
    cfg.validate()
    if cfg.eps1 > problem.region.radius / 2.0:
        raise ValueError(
            "eps1=%g exceeds half the region radius %g" % (cfg.eps1, problem.region.radius)
        )
    x0 = np.asarray(x0, dtype=float)
    if not in_region(problem, x0):
        raise ValueError("x0 lies outside the region ||h|| <= %g" % problem.region.radius)
    records = []
    try:
        ev = evaluate(problem, x0, cfg.beta, with_grad=True)
    except RankDeficiencyError:
        return RunTrace(
            config=cfg,
            records=[],
            final_x=x0,
            final_certificate=None,
            termination="rank_deficient",
        )
    k = 0
    while True:
        if _stop_check is not None:
            tag = _stop_check(k, ev)
            if tag is not None:
                return _finalize(problem, cfg, records, ev, tag, k)
        if k >= cfg.max_iters:
            return _finalize(problem, cfg, records, ev, "max_iters", k)
        try:
            if ev.grad_norm > cfg.eps1:
                alpha, x_next, bts = gradient_backtrack(
                    problem, ev.x, cfg.beta, ev.grad_g, cfg, g_x=ev.g_val
                )
                ev_next = evaluate(problem, x_next, cfg.beta, with_grad=True)
                records.append(
                    IterationRecord(
                        k=k,
                        kind="gradient",
                        step_len=alpha,
                        g_before=ev.g_val,
                        g_after=ev_next.g_val,
                        grad_norm=ev.grad_norm,
                        h_norm=ev_next.h_norm,
                        curvature=None,
                        backtracks=bts,
                    )
                )
            elif math.isfinite(cfg.eps2):
                hess = penalty_hess(problem, ev.x, cfg.beta, cfg.fd_step)
                lam_min, d = sym_eig_min(hess)
                if lam_min < -cfg.eps2:
                    if float(d @ ev.grad_g) > 0.0:
                        d = -d
                    alpha, x_next, bts = eigen_backtrack(
                        problem, ev.x, cfg.beta, d, lam_min, cfg, g_x=ev.g_val
                    )
                    ev_next = evaluate(problem, x_next, cfg.beta, with_grad=True)
                    records.append(
                        IterationRecord(
                            k=k,
                            kind="eigen",
                            step_len=alpha,
                            g_before=ev.g_val,
                            g_after=ev_next.g_val,
                            grad_norm=ev.grad_norm,
                            h_norm=ev_next.h_norm,
                            curvature=lam_min,
                            backtracks=bts,
                        )
                    )
                else:
                    return _finalize(problem, cfg, records, ev, "converged", k)
            else:
                return _finalize(problem, cfg, records, ev, "converged", k)
        except RankDeficiencyError:
            return _finalize(problem, cfg, records, ev, "rank_deficient", k)
        except BacktrackFailureError:
            return _finalize(problem, cfg, records, ev, "beta_too_small", k)
        ev = ev_next
        k += 1


def _satisfies_tolerances(problem, x, cfg):
    ev = evaluate(problem, x, cfg.beta, with_grad=True)
    if ev.grad_norm > cfg.eps1:
        return False
    if math.isinf(cfg.eps2):
        return True
    lam_min, _ = sym_eig_min(penalty_hess(problem, x, cfg.beta, cfg.fd_step))
    return lam_min >= -cfg.eps2


def plateau(problem, x0, cfg, gamma=2.0, beta0=1.0, lp0=100, max_plateaus=60):
    """Rerun the solver with growing beta until it converges on its own.

    Each plateau runs at constant beta with the stopping criterion
    "B(x_k) >= beta_l or k > LP_l", where B is the maximum of the pointwise
    beta thresholds, checked once per accepted iterate. On a B-trigger the
    budget grows by (gamma*B/beta_l)^4 and beta jumps to gamma*B; otherwise
    both grow geometrically (gamma^4 and gamma). Backtracking failure is
    treated as a B-trigger at the current beta, forcing growth.

    Raises PlateauLimitError after max_plateaus plateaus without convergence.
    """
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    if beta0 <= 0 or lp0 <= 0:
        raise ValueError("beta0 and lp0 must be positive")
    x = np.asarray(x0, dtype=float)
    beta_l = float(beta0)
    lp_l = float(lp0)
    stages = []
    all_records = []
    for ell in range(max_plateaus):
        cfg_l = replace(cfg, beta=beta_l)
        b_at_stop = [None]

        def stop_check(k, ev, _beta=beta_l, _lp=lp_l, _cache=b_at_stop):
            th = beta_thresholds(problem, ev.x)
            _cache[0] = th.b_max
            if th.b_max >= _beta:
                return "b_trigger"
            if k > _lp:
                return "budget"
            return None

        trace = gradient_eigenstep(problem, x, cfg_l, _stop_check=stop_check)
        all_records.extend(trace.records)
        x = trace.final_x
        iters = sum(1 for r in trace.records if r.kind != "terminal")
        reason = trace.termination
        if reason == "converged":
            stages.append(PlateauStage(ell, beta_l, lp_l, iters, "converged", None))
            return RunTrace(cfg_l, all_records, x, trace.final_certificate, "converged", stages)
        if reason in ("max_iters", "rank_deficient"):
            stages.append(PlateauStage(ell, beta_l, lp_l, iters, reason, None))
            return RunTrace(cfg_l, all_records, x, trace.final_certificate, reason, stages)
        try:
            converged_now = reason in ("b_trigger", "budget") and _satisfies_tolerances(
                problem, x, cfg_l
            )
        except RankDeficiencyError:
            stages.append(PlateauStage(ell, beta_l, lp_l, iters, "rank_deficient", None))
            return RunTrace(
                cfg_l, all_records, x, trace.final_certificate, "rank_deficient", stages
            )
        if converged_now:
            stages.append(PlateauStage(ell, beta_l, lp_l, iters, "converged", None))
            cert = certify(problem, x, cfg_l.eps1, 2.0 * cfg_l.eps1, cfg_l.eps2)
            _assert_first_order_bounds(problem, x, cert, cfg_l)
            return RunTrace(cfg_l, all_records, x, cert, "converged", stages)
        if reason == "b_trigger":
            b_val = float(b_at_stop[0])
            stages.append(PlateauStage(ell, beta_l, lp_l, iters, "b_trigger", b_val))
            lp_l = (gamma * b_val / beta_l) ** 4 * lp_l
            beta_l = gamma * b_val
        elif reason == "beta_too_small":
            stages.append(PlateauStage(ell, beta_l, lp_l, iters, "backtrack_failure", beta_l))
            lp_l = gamma**4 * lp_l
            beta_l = gamma * beta_l
        else:  # budget exhausted
            stages.append(PlateauStage(ell, beta_l, lp_l, iters, "budget", None))
            lp_l = gamma**4 * lp_l
            beta_l = gamma * beta_l
    raise PlateauLimitError("no convergence within %d plateaus" % max_plateaus)


def restore_feasibility(problem, x0, step, t_end):
    """Integrate the constraint-violation gradient flow dx/dt = -Dh(x)^T h(x).

    Fixed-size fourth-order (classical Runge-Kutta) steps, halved whenever
    the violation energy phi = 0.5 ||h||^2 fails to decrease; stops at
    t_end or once phi <= 1e-16. Returns the final point and the list of
    (t, phi) samples including t = 0.

    Raises StepSizeError when halving cannot restore monotone decrease.
    """
    if step <= 0 or t_end <= 0:
        raise ValueError("step and t_end must be positive")
    x = np.asarray(x0, dtype=float)
    if not in_region(problem, x):
        raise ValueError("x0 lies outside the region ||h|| <= %g" % problem.region.radius)

    def rhs(y):
        return -(problem.jac_h(y).T @ np.asarray(problem.h(y), dtype=float).ravel())

    def phi_at(y):
        hv = np.asarray(problem.h(y), dtype=float).ravel()
        return 0.5 * float(hv @ hv)

    phi = phi_at(x)
    log = [(0.0, phi)]
    t = 0.0
    dt = float(step)
    while t < t_end - 1e-15 and phi > 1e-16:
        dt_eff = min(dt, t_end - t)
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt_eff * k1)
        k3 = rhs(x + 0.5 * dt_eff * k2)
        k4 = rhs(x + dt_eff * k3)
        x_new = x + (dt_eff / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        phi_new = phi_at(x_new)
        if phi_new > phi:
            dt *= 0.5
            if dt < step * 2.0**-40:
                raise StepSizeError(
                    "violation energy keeps increasing; step could not be salvaged by halving"
                )
            continue
        x = x_new
        t += dt_eff
        phi = phi_new
        log.append((t, phi))
    return x, log
