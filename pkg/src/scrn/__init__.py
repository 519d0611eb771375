"""Momentum-based stochastic cubic-regularized Newton methods.

Library layout:

- :mod:`scrn.linalg` -- norms, extreme eigenvalues, cubed-norm bounds
- :mod:`scrn.subproblem` -- exact and Krylov cubic-subproblem solvers
- :mod:`scrn.oracles` -- seeded stochastic derivative estimators
- :mod:`scrn.problems` -- benchmark objectives with analytic derivatives
- :mod:`scrn.schedules` -- horizon-indexed parameter schedules and constants
- :mod:`scrn.algorithms` -- outer-loop drivers and run diagnostics
- :mod:`scrn.datasets` -- LIBSVM parsing and relabeling
- :mod:`scrn.harness` -- config-driven sweeps, CSV traces, rate studies
- :mod:`scrn.checks` -- executable property suites
"""

from .algorithms import (
    OracleSet,
    RunTrace,
    SolverOptions,
    SolverState,
    crn_run,
    potential_value,
    scrn_pm_run,
    scrn_pm_step,
    scrn_rm_run,
    scrn_rm_step,
    sgd_momentum_run,
    ssosp_check,
    stationarity_measure,
)
from .exceptions import InvalidInputError, NumericFailure
from .oracles import (
    GradientOracleSpec,
    HessianOracleSpec,
    oracle_stream,
    paired_hessian_samples,
    sample_gradient,
    sample_hessian,
)
from .problems import (
    LipschitzHints,
    ProblemInstance,
    logistic_objective,
    nls_objective,
    robust_regression_objective,
    synthetic_quartic,
)
from .schedules import (
    ScheduleParams,
    complexity_constants,
    fixed_schedule,
    pm_schedule,
    rm_schedule,
)
from .subproblem import CubicModel, CubicSolution, model_value, solve_exact, solve_lanczos

__version__ = "0.1.0"

__all__ = [
    "CubicModel",
    "CubicSolution",
    "GradientOracleSpec",
    "HessianOracleSpec",
    "InvalidInputError",
    "LipschitzHints",
    "NumericFailure",
    "OracleSet",
    "ProblemInstance",
    "RunTrace",
    "ScheduleParams",
    "SolverOptions",
    "SolverState",
    "complexity_constants",
    "crn_run",
    "fixed_schedule",
    "logistic_objective",
    "model_value",
    "nls_objective",
    "oracle_stream",
    "paired_hessian_samples",
    "pm_schedule",
    "potential_value",
    "rm_schedule",
    "robust_regression_objective",
    "sample_gradient",
    "sample_hessian",
    "scrn_pm_run",
    "scrn_pm_step",
    "scrn_rm_run",
    "scrn_rm_step",
    "sgd_momentum_run",
    "solve_exact",
    "solve_lanczos",
    "ssosp_check",
    "stationarity_measure",
    "synthetic_quartic",
]
