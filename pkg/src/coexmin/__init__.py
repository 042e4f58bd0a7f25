"""coexmin: coexistence states of strongly competing species on dumbbell domains.

Minimizes the competition-penalized free energy of k species under no-flux
boundary conditions on masked rectangular grids, continues the minimizer
toward the strong-competition segregation limit, and verifies the
quantitative properties of those states (a-priori bounds, two-sided energy
estimates, overlap decay, extremality inequalities).
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .analysis import (
    check_2kvar,
    energy_sandwich,
    hard_segregate,
    segregation_metrics,
    taylor_remainder_check,
    trivial_min_comparison,
)
from .config import ConfigError, RunConfig, parse_config
from .discretization import (
    EnergyBreakdown,
    State,
    build_state_W,
    energy_I,
    energy_J,
    grad_I,
    h1_core_distance,
    neumann_laplacian,
)
from .geometry import DomainGrid, DomainSpec, Rect, build_domain, measure, validate_spec
from .pipeline import run
from .reaction import (
    AssumptionReport,
    ReactionModel,
    check_assumptions,
    eval_truncated,
    make_logistic,
)
from .solver import (
    ContinuationResult,
    SolveOptions,
    SolveResult,
    initial_state,
    kappa_continuation,
    minimize,
    overlap_integral,
)

__all__ = [
    "BACKEND",
    "AssumptionReport",
    "ConfigError",
    "ContinuationResult",
    "DomainGrid",
    "DomainSpec",
    "EnergyBreakdown",
    "ReactionModel",
    "Rect",
    "RunConfig",
    "SolveOptions",
    "SolveResult",
    "State",
    "build_domain",
    "build_state_W",
    "check_2kvar",
    "check_assumptions",
    "energy_I",
    "energy_J",
    "energy_sandwich",
    "eval_truncated",
    "grad_I",
    "h1_core_distance",
    "hard_segregate",
    "initial_state",
    "kappa_continuation",
    "make_logistic",
    "measure",
    "minimize",
    "neumann_laplacian",
    "overlap_integral",
    "parse_config",
    "run",
    "segregation_metrics",
    "taylor_remainder_check",
    "trivial_min_comparison",
    "validate_spec",
]
