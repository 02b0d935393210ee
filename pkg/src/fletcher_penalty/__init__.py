"""Smooth exact penalty for equality-constrained minimization.

Minimizes f(x) subject to h(x) = 0 through the penalty
g(x) = f(x) - <h(x), lambda(x)> + beta ||h(x)||^2 with least-squares
multipliers, certifying approximate first/second-order criticality on the
constraint level set through each iterate.
"""

from .criticality import (
    CriticalityCertificate,
    LayeredQuantities,
    certify,
    lagrangian_check,
    layered_grad,
    layered_hess,
)
from .derivative_check import (
    DerivativeReport,
    check_problem,
    fd_grad,
    fd_jacobian,
    relative_error,
)
from .exceptions import (
    BacktrackFailureError,
    EvaluationError,
    FletcherPenaltyError,
    NumericalFailureError,
    PlateauLimitError,
    RankDeficiencyError,
    StepSizeError,
)
from .linalg import SvdResult, kernel_basis, pinv_apply, svd, sym_eig_min
from .penalty import (
    BetaThresholds,
    PenaltyEval,
    beta_thresholds,
    dlambda_jacobian,
    evaluate,
    in_region,
    multipliers,
    penalty_grad,
    penalty_hess,
    penalty_value,
)
from .problems import (
    Cost,
    Problem,
    RegionParams,
    builtin_problem,
    linear_cost,
    make_product,
    make_rayleigh_sphere,
    make_sphere,
    make_stiefel,
    quadratic_cost,
    random_point_in_region,
    zero_cost,
)
from .solver import (
    IterationRecord,
    PlateauStage,
    RunTrace,
    SolverConfig,
    eigen_backtrack,
    gradient_backtrack,
    gradient_eigenstep,
    plateau,
    region_step_floors,
    restore_feasibility,
)

__version__ = "0.1.0"
