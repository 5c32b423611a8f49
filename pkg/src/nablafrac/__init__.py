"""Nabla discrete fractional calculus and contraction-mapping solvers."""

__version__ = "0.1.0"

from nablafrac.errors import (
    DomainError,
    LipschitzError,
    MaxIterError,
    ModelError,
    NoContractionError,
    ParseError,
    RisingOverflowError,
    TailError,
    ValidationError,
)
from nablafrac.kernel import KernelWeights, cumulative_kernel, kernel_weights, rising_factorial
from nablafrac.operators import (
    GridFunction,
    ivp_representation,
    nabla,
    nabla_diff,
    nabla_diff_grid,
    nabla_sum,
    nabla_sum_grid,
    power_rule,
)
from nablafrac.solver import (
    ContractionReport,
    LinearProblem,
    Membership,
    Metric,
    NonlinearProblem,
    SolverConfig,
    SolverReport,
    apply_T,
    check_lipschitz,
    contraction_constant_linear,
    contraction_constant_sup,
    contraction_constant_weighted,
    ratio_tail_bound,
    residual,
    residual_grid,
    solve_linear,
    solve_nonlinear,
    tail_bound,
    verify_membership,
)
