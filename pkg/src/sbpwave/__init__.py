"""SBP-SAT finite differences for the second-order wave equation."""

from .convergence import ConvergenceReport, StudyConfig, l2_error, max_error, rate, run_study
from .discretization import (
    PenaltyConfig,
    ProblemKind,
    ProblemSpec,
    SemiDiscreteSystem,
    StateVector,
    discrete_energy,
    min_penalty,
    perturb_neumann_boundary,
    rhs,
)
from .normal_mode import (
    BoundarySystem,
    build_boundary_system,
    characteristic_roots,
    column_space_membership,
    determinant_condition,
    predict_rate,
    root_decay_margin,
    s_plus,
    svd_coupling,
)
from .operators import (
    PeriodicOperator,
    SbpOperatorSet,
    apply_2d,
    borrowing_constant,
    build_periodic,
    build_sbp,
    verify_borrowing,
)
from .timeloop import TimeGrid, rk4_step, simulate

__version__ = "0.1.0"
