"""Optimal consensus weights, convergence rates, and quantized averaging
simulation for symmetric, complete-cored, and k-cored star networks."""

from .topology import (
    Custom,
    CcsStar,
    Graph,
    KcsStar,
    SymmetricStar,
    Topology,
    TopologyError,
    build,
    graph_from_csv,
    graph_to_csv,
    validate,
)
from .weights import (
    WeightAssignment,
    WeightError,
    assemble_matrix,
    best_constant_weights,
    check_weight_matrix,
    matrix_to_csv,
    max_degree_weights,
    metropolis_weights,
    optimal_weights,
    per_stratum_from_matrix,
    scheme_matrix,
    weights_to_csv,
    weights_to_json,
)
from .spectral import (
    InterlacingReport,
    SpectralError,
    StratifiedBlocks,
    char_kcs,
    char_symmetric,
    eig_symmetric,
    interlacing_check,
    k_max,
    slem,
    slem_closed_form,
    spectrum_to_csv,
    stratify,
    theta_root_kcs,
    theta_root_symmetric,
)
from .optimality import (
    InvarianceReport,
    OptimizeResult,
    SlacknessReport,
    central_weight_invariance,
    kcs_slem_curve,
    minimize_slem,
    slackness_residuals,
)
from .simulate import (
    QuantizerSpec,
    TrialOutcome,
    TrialStats,
    derive_trial_seed,
    initial_states,
    iterate,
    monte_carlo,
    quantize,
    run_trial,
)

__version__ = "0.1.0"
