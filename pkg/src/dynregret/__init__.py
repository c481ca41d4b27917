"""Online convex optimization on drifting quadratic losses.

Learners (plain/preconditioned gradient descent, optimistic Newton,
multi-gradient descent), adversarial sequence generators, exact regularity
measures (path lengths, function variation, prediction variation), and
closed-form dynamic-regret bound verification.
"""

from .errors import (
    ConfigInvalid,
    DimensionMismatch,
    Diverged,
    DynRegretError,
    EmptyHull,
    InvalidConstants,
    NegativeQuadraticForm,
    NoConvergence,
    NotAdmissible,
    NotPositiveDefinite,
    NotSymmetric,
    RhoOutOfRange,
    UnsupportedEnvironment,
    ZetaTooSmall,
)
from .linalg import SpdBounds, a_norm, eig_extremes, spd_solve
from .projections import (
    UNCONSTRAINED,
    Ball,
    Box,
    FeasibleSet,
    ProjectionResult,
    Unconstrained,
    project_a_norm,
    project_euclidean,
)
from .losses import (
    EnvironmentSpec,
    FunctionSequence,
    QuadraticLoss,
    feasible_minimizer,
    gen_alternating_center_decay,
    gen_alternating_offset,
    gen_random_walk,
    gen_static,
    load_sequence,
    save_sequence,
    sequence_from_dict,
    sequence_to_dict,
)
from .learners import (
    GradientDescent,
    IdentityPreconditioner,
    MultiGradientDescent,
    OptimisticNewton,
    OraclePredictor,
    PreconditionedDescent,
    RegularizedNewtonPreconditioner,
    StalePredictor,
    contraction_factor,
    omgd_inner_count,
    regularized_newton_preconditioner,
    regularized_newton_threshold,
    run_online,
)
from .regularity import (
    BoundReport,
    RegretLedger,
    RegularityReport,
    RoundRecord,
    RunTrace,
    check_theorem1_admissible,
    corollary3_bound,
    corollary3_bound_tightest,
    evaluate_bound,
    function_variation,
    gradient_prediction_variation,
    max_step,
    path_length_p,
    prediction_variation,
    regularity_report,
    theorem1_bound,
    theorem1_step_size,
    theorem2_bound,
    theorem2_bound_tightest,
    theorem3_bound,
    theorem5_bound,
    theorem6_bound,
)
from .harness import (
    ExperimentConfig,
    LearnerConfig,
    RunSummary,
    build_learner,
    compare_regularities,
    emit_csv,
    load_config,
    parse_config,
    run_experiment,
)

__version__ = "0.1.0"
