"""Statistical-dimension bounds, optimal weights, and recovery experiments.

The package computes measurement bounds for three equality-constrained
convex recovery programs with non-uniform prior information — weighted
entrywise l1-analysis, weighted block l1,2, and weighted total variation —
together with the unique optimal weights that minimize each bound, Monte
Carlo validation of the closed-form expectations, ADMM solvers for the
programs themselves, and a config-driven experiment harness.
"""
from .bounds import (
    BoundReport,
    additivity_gap,
    m_hat,
    minimize_over_t,
    psi_block,
    psi_entrywise,
    psi_tv,
)
from .errors import (
    ConfigError,
    DomainError,
    NoConvergenceError,
    QuadratureError,
    SingularMatrixError,
    StatdimError,
    UnboundedWeightError,
)
from .harness import (
    CSV_HEADER,
    CellResult,
    ExperimentConfig,
    GridResult,
    run_phase_grid,
    run_weight_comparison,
    write_csv,
)
from .kernels import (
    KernelEval,
    phi,
    phi1,
    phi1_grad,
    phi2,
    phi_block,
    phi_block_prime,
    phi_prime,
)
from .mc import (
    McEstimate,
    derive_rng,
    dist_sq_analysis_cone,
    dist_sq_block,
    dist_sq_entrywise,
    dist_sq_tv,
    estimate_statdim,
    estimate_statdim_analysis,
    mean_dist_sq,
)
from .models import (
    BlockStructure,
    Dictionary,
    GradientProfile,
    ModelInstance,
    PartitionSpec,
    condition_number,
    dct_dictionary,
    difference_condition_number,
    difference_operator,
    gradient_support_profile,
    realized_accuracies,
)
from .solvers import (
    RecoveryResult,
    is_success,
    solve_weighted_analysis,
    solve_weighted_block,
    solve_weighted_tv,
)
from .synth import (
    InstanceSeed,
    block_instance,
    entrywise_instance,
    gaussian_matrix,
    gradient_instance,
)
from .weights import (
    WeightSolution,
    block_weights,
    entrywise_weights,
    tv_objective,
    tv_objective_grad,
    tv_weights,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "StatdimError", "DomainError", "SingularMatrixError", "UnboundedWeightError",
    "NoConvergenceError", "QuadratureError", "ConfigError",
    # kernels
    "KernelEval", "phi", "phi_prime", "phi_block", "phi_block_prime",
    "phi1", "phi1_grad", "phi2",
    # models
    "PartitionSpec", "Dictionary", "BlockStructure", "GradientProfile",
    "ModelInstance", "condition_number", "difference_operator",
    "difference_condition_number", "dct_dictionary",
    "gradient_support_profile", "realized_accuracies",
    # bounds
    "BoundReport", "psi_entrywise", "psi_block", "psi_tv", "minimize_over_t",
    "m_hat", "additivity_gap",
    # weights
    "WeightSolution", "entrywise_weights", "block_weights", "tv_weights",
    "tv_objective", "tv_objective_grad",
    # mc
    "McEstimate", "derive_rng", "dist_sq_entrywise", "dist_sq_block",
    "dist_sq_tv", "mean_dist_sq", "estimate_statdim",
    "estimate_statdim_analysis", "dist_sq_analysis_cone",
    # solvers
    "RecoveryResult", "solve_weighted_analysis", "solve_weighted_block",
    "solve_weighted_tv", "is_success",
    # synth
    "InstanceSeed", "gaussian_matrix", "entrywise_instance", "block_instance",
    "gradient_instance",
    # harness
    "ExperimentConfig", "CellResult", "GridResult", "CSV_HEADER",
    "run_phase_grid", "run_weight_comparison", "write_csv",
]
