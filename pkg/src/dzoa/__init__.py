"""Differentially private decentralized zeroth-order consensus optimization.

The package solves sum-structured empirical-risk problems (lasso by
default) over a peer-to-peer network with a consensus ADMM outer loop
whose primal step is a two-point zeroth-order mirror-descent inner loop.
The estimator's own randomness supplies (epsilon, delta)-style privacy,
tracked by an analytic accountant; an explicit-noise ADMM baseline and a
centralized reference solver support the accuracy comparisons.
"""

from .admm import (
    NK_CONVENTION,
    AgentState,
    OuterTrace,
    consensus_residual,
    dual_update,
    exact_primal_oracle,
    exchange,
    matrix_form_step,
    messages_in,
    primal_update,
    run,
)
from .centralized import (
    BoundInputs,
    GapRow,
    brute_force_lasso,
    consensus_objective,
    consensus_reference,
    gap_vs_M_experiment,
    inner_bound,
    normalized_error,
    solve_lasso_centralized,
    theorem3_bound,
)
from .errors import (
    CheckFailed,
    ConfigError,
    DimensionMismatch,
    DisconnectedGraph,
    DomainError,
    DzoaError,
    GradientBoundExceeded,
    IncompleteInbox,
    Infeasible,
    InvalidEdge,
    NegativeBound,
    NoConvergence,
    NonFiniteIterate,
    NumericalFailure,
    ZeroColumn,
    ZeroReference,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    calibrate_alpha0,
    config_from_dict,
    config_from_file,
    config_to_yaml,
    default_config,
    final_normalized_error,
    noisy_admm_baseline,
    read_trace_csv,
    run_experiment,
    sweep,
    write_trace_csv,
)
from .privacy import (
    AccountantReport,
    AgentAccount,
    CheckReport,
    PrivacyParams,
    accountant_report,
    empirical_privacy_check,
    epsilon_intrinsic,
    l2_sensitivity,
    sigma_for,
    total_epsilon,
    variance_upper_bound,
)
from .problem import (
    Dataset,
    ErmProblem,
    GradientBoundReport,
    LocalAugmentedContext,
    assert_gradient_bound,
    certified_c1,
    dataset_from_csv,
    dataset_to_csv,
    eval_local_augmented,
    eval_local_f,
    gradient_bound_report,
    make_context,
    make_local_objective,
    normalize_data,
    synthesize_data,
)
from .topology import (
    DEFAULT_TOPOLOGY_EDGES,
    ConsensusMatrices,
    Graph,
    build_graph,
    build_matrices,
    export_matrices,
    spectral_constants,
)
from .zeroth_order import (
    ESTIMATOR_CONSTANT,
    GradientSample,
    InnerLoopResult,
    ZoConfig,
    averaged_gradient,
    estimate_lipschitz,
    inner_loop,
    resolve_radius,
    smoothing_radii,
    step_size,
    two_point_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "AccountantReport",
    "AgentAccount",
    "AgentState",
    "BoundInputs",
    "CheckFailed",
    "CheckReport",
    "ConfigError",
    "ConsensusMatrices",
    "DEFAULT_TOPOLOGY_EDGES",
    "Dataset",
    "DimensionMismatch",
    "DisconnectedGraph",
    "DomainError",
    "DzoaError",
    "ESTIMATOR_CONSTANT",
    "ErmProblem",
    "ExperimentConfig",
    "ExperimentResult",
    "GapRow",
    "GradientBoundExceeded",
    "GradientBoundReport",
    "GradientSample",
    "Graph",
    "IncompleteInbox",
    "Infeasible",
    "InnerLoopResult",
    "InvalidEdge",
    "LocalAugmentedContext",
    "NK_CONVENTION",
    "NegativeBound",
    "NoConvergence",
    "NonFiniteIterate",
    "NumericalFailure",
    "OuterTrace",
    "PrivacyParams",
    "ZeroColumn",
    "ZeroReference",
    "ZoConfig",
    "accountant_report",
    "assert_gradient_bound",
    "averaged_gradient",
    "brute_force_lasso",
    "build_graph",
    "build_matrices",
    "calibrate_alpha0",
    "certified_c1",
    "config_from_dict",
    "config_from_file",
    "config_to_yaml",
    "consensus_objective",
    "consensus_reference",
    "consensus_residual",
    "dataset_from_csv",
    "dataset_to_csv",
    "default_config",
    "dual_update",
    "empirical_privacy_check",
    "epsilon_intrinsic",
    "estimate_lipschitz",
    "eval_local_augmented",
    "eval_local_f",
    "exact_primal_oracle",
    "exchange",
    "export_matrices",
    "final_normalized_error",
    "gap_vs_M_experiment",
    "gradient_bound_report",
    "inner_bound",
    "inner_loop",
    "l2_sensitivity",
    "make_context",
    "make_local_objective",
    "matrix_form_step",
    "messages_in",
    "noisy_admm_baseline",
    "normalize_data",
    "normalized_error",
    "primal_update",
    "read_trace_csv",
    "resolve_radius",
    "run",
    "run_experiment",
    "sigma_for",
    "smoothing_radii",
    "solve_lasso_centralized",
    "spectral_constants",
    "step_size",
    "sweep",
    "synthesize_data",
    "theorem3_bound",
    "total_epsilon",
    "two_point_estimate",
    "variance_upper_bound",
    "write_trace_csv",
]
