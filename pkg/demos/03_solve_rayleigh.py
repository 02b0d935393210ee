"""Gradient-eigenstep run on the Rayleigh quotient over the sphere.

Minimizing 0.5 <x, A x> over the unit sphere has the eigenvectors of A as
its critical points; only the bottom eigenvector is a minimizer. Starting
from a deliberately bad point (the second eigenvector, a saddle of the
level-set Hessian), the solver needs negative-curvature steps to escape.
"""

import numpy as np

from fletcher_penalty import SolverConfig, gradient_eigenstep, make_rayleigh_sphere

n = 10
a = np.diag(np.arange(1.0, n + 1.0))
problem = make_rayleigh_sphere(a)
cfg = SolverConfig(eps1=1e-5, eps2=1e-4, beta=10.0)

print("A = diag(1..%d); global optimum value = 0.5 * lambda_min(A) = %.1f" % (n, 0.5))
print()

for label, x0 in [("random start (seed 1)", problem.init_point(1)),
                  ("saddle start (2nd eigenvector)", np.eye(n)[1])]:
    trace = gradient_eigenstep(problem, x0, cfg)
    total, grad_steps, eigen_steps = trace.iteration_counts()
    print("%s:" % label)
    print("    termination=%s after %d steps (%d gradient, %d eigen)"
          % (trace.termination, total, grad_steps, eigen_steps))
    print("    f(final) = %.8f" % problem.f(trace.final_x))
    cert = trace.final_certificate
    print("    certificate: ||h||=%.2e ||grad_M f||=%.2e focp=%s socp=%s"
          % (cert.eps0_measured, cert.eps1_measured, cert.focp_pass, cert.socp_pass))
    eigen_records = [r for r in trace.records if r.kind == "eigen"]
    if eigen_records:
        r = eigen_records[0]
        print("    first eigen step: curvature %.4f, step %.3f, decrease %.2e"
              % (r.curvature, r.step_len, r.g_before - r.g_after))
    print()

print("tolerance sweep (first-order variant, same start):")
print("    %-8s %s" % ("eps1", "iterations"))
x0 = problem.init_point(1)
import math

for eps in (1e-2, 1e-3, 1e-4, 1e-5):
    trace = gradient_eigenstep(problem, x0, SolverConfig(eps1=eps, eps2=math.inf, beta=10.0))
    print("    %-8.0e %d" % (eps, trace.iteration_counts()[0]))
