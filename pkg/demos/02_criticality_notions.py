"""Why measure criticality on the constraint level sets?

The classic Lagrangian-based conditions accept a point when SOME multiplier
makes the Lagrangian gradient small and its reduced Hessian almost positive.
On the sphere with a linear cost, the global MAXIMIZER passes that test at
moderate tolerances. The level-set (Riemannian) certificate rejects it: the
tangent Hessian of the cost has eigenvalue -1 there, no matter the
multiplier convention.
"""

import numpy as np

from fletcher_penalty import certify, lagrangian_check, layered_hess, make_sphere

n = 5
w = np.zeros(n)
w[0] = 1.0
problem = make_sphere(n, w)

print("minimize <x, w> on the unit sphere; test point: the MAXIMIZER x = w")
print("targets: eps0 = eps1 = eps2 = 0.5")
print()

for lam in (0.25, 0.5):
    first, second = lagrangian_check(problem, w, [lam], 0.5, 0.5, 0.5)
    print("Lagrangian check with multiplier %.2f -> first-order %s, second-order %s"
          % (lam, first, second))

lq = layered_hess(problem, w)
print()
print("level-set measurements at x = w:")
print("    ||h||          = %.3e" % lq.h_norm)
print("    ||grad_M f||   = %.3e" % lq.riem_grad_norm)
print("    min eig Hess_M = % .6f" % lq.min_eig)

cert = certify(problem, w, 0.5, 0.5, 0.5)
print()
print("certificate: first-order pass=%s, second-order pass=%s" % (cert.focp_pass, cert.socp_pass))
print()
print("The maximizer sneaks through the multiplier-based test (with the")
print("right multiplier) but cannot pass the layered second-order test:")
print("its tangent curvature is -1, far below the -0.5 target.")
