"""Persistent random walks on Z^2 in homogeneous and random environments."""

from .core import (
    APERIODIC_NORM_ONE,
    STRAIGHT_LINE,
    SYMMETRIC_LEFT_RIGHT,
    W,
    Direction,
    Parity,
    RelativeMove,
    TransitionMatrix,
    deviation_norm,
    is_doubly_stochastic,
    is_elliptic,
    is_isotropic,
    is_primitive,
    is_stochastic,
    parity_class,
    relative_to_absolute,
    stationary_vector,
    sufficient_conditions,
    toth_condition,
    toth_epsilon,
)
from .dual import (
    DualVertex,
    EdgeClass,
    EmbeddingTable,
    Scheme,
    classify_transition,
    project_walk,
    remove_dead_times,
    solve_embedding,
    validate_embedding,
)
from .environments import (
    Box,
    Environment,
    ZetaLaw,
    audit_env,
    average_drift,
    backward_inhom_env,
    flr_env,
    forward_inhom_env,
    forward_trap_env,
    homogeneous_env,
    leftright_env,
    local_drift,
    shift_env,
    symmetric_leftright_env,
)
from .errors import PRWalkError
from .estimators import (
    StatReport,
    clt_diagnostic,
    msd_curve,
    return_statistics,
    run_ensemble,
    velocity_estimate,
)
from .homogeneous import Classification, asymptotic_velocity, classify_homogeneous, lambda_expressions
from .walker import (
    Trajectory,
    WalkerState,
    counting_vector,
    exact_distribution,
    first_return,
    simulate,
    step,
)

__version__ = "0.1.0"
