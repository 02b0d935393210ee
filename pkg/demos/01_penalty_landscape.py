"""A first look at the smooth exact penalty on the unit sphere.

The penalty g(x) = f(x) - <h(x), lambda(x)> + beta ||h(x)||^2 folds the
constraint h(x) = ||x||^2 - 1 into a single smooth function of x whose
critical points, for beta above a computable pointwise threshold, are
exactly the constrained critical points. This script walks through the
pieces at a handful of points.
"""

import numpy as np

from fletcher_penalty import (
    beta_thresholds,
    in_region,
    layered_grad,
    make_sphere,
    multipliers,
    penalty_grad,
    penalty_value,
)

w = np.zeros(5)
w[0] = 1.0
problem = make_sphere(5, w)  # minimize <x, w> on the unit sphere
beta = 1.0

print("cost f(x) = <x, w>, constraint ||x||^2 = 1 in R^5, beta =", beta)
print()

for label, x in [
    ("feasible minimizer -w", -w),
    ("feasible maximizer +w", w),
    ("infeasible 1.1*w", 1.1 * w),
    ("random feasible", problem.init_point(0)),
]:
    lam, _ = multipliers(problem, x)
    g = penalty_value(problem, x, beta)
    grad = penalty_grad(problem, x, beta)
    rg = layered_grad(problem, x)
    print("%-22s in_region=%-5s lambda=% .4f" % (label, in_region(problem, x), lam[0]))
    print("    f=% .6f   g=% .6f" % (problem.f(x), g))
    print("    ||grad g||=%.3e   ||grad_M f||=%.3e" % (np.linalg.norm(grad), np.linalg.norm(rg)))

# On the feasible set the penalty gradient IS the projected cost gradient,
# so stationarity of g there certifies constrained first-order criticality.
x = problem.init_point(3)
gap = np.linalg.norm(penalty_grad(problem, x, beta) - layered_grad(problem, x))
print()
print("feasible identity check: ||grad g - grad_M f|| = %.2e" % gap)

# How large must beta be? The pointwise thresholds say it all: above
# b_max the penalty is exact and the certificate inequalities apply.
th = beta_thresholds(problem, 1.05 * w)
print()
print("pointwise thresholds at 1.05*w:")
print("    sigma_min=%.3f sigma_max=%.3f C_lambda=%.3f" % (th.sigma_min, th.sigma_max, th.c_lambda))
print("    beta1=%.4f beta2=%.4f beta3=%.4f  =>  b_max=%.4f" % (th.beta1, th.beta2, th.beta3, th.b_max))
print("beta =", beta, "exceeds b_max:", beta > th.b_max)
