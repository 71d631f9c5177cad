"""Column subset selection for bifidelity surrogate models.

The heavy lifting lives in the compiled extension ``mfalloc._core``;
this package re-exports its public surface.
"""

from ._core import (
    BifidelityModel,
    BurgersSpec,
    CsspOptimum,
    Ensemble,
    ErrorRecord,
    ErrorReport,
    ParameterGrid,
    PendulumSpec,
    RecoveryDiagnostics,
    RecoveryInstance,
    SelectionResult,
    SeriesResult,
    SolveFailure,
    SteadyResult,
    brute_force_cssp,
    build_burgers_ensemble,
    build_pendulum_ensemble,
    burgers_default_grid,
    burgers_steady,
    coefficients,
    config_hash_hex,
    consistency_bound,
    evaluate_error,
    expansion_matrix,
    fit,
    group_lasso_objective,
    lambda_min,
    load_ensemble,
    load_ensemble_meta,
    noisy_thresholds,
    pendulum_default_grid,
    pendulum_series,
    projection_residual,
    rank_k_error,
    reconstruct_high,
    save_ensemble,
    select,
    sweep,
    synthetic_recovery_instance,
)

__version__ = "0.1.0"

__all__ = [
    "BifidelityModel",
    "BurgersSpec",
    "CsspOptimum",
    "Ensemble",
    "ErrorRecord",
    "ErrorReport",
    "ParameterGrid",
    "PendulumSpec",
    "RecoveryDiagnostics",
    "RecoveryInstance",
    "SelectionResult",
    "SeriesResult",
    "SolveFailure",
    "SteadyResult",
    "brute_force_cssp",
    "build_burgers_ensemble",
    "build_pendulum_ensemble",
    "burgers_default_grid",
    "burgers_steady",
    "coefficients",
    "config_hash_hex",
    "consistency_bound",
    "evaluate_error",
    "expansion_matrix",
    "fit",
    "group_lasso_objective",
    "lambda_min",
    "load_ensemble",
    "load_ensemble_meta",
    "noisy_thresholds",
    "pendulum_default_grid",
    "pendulum_series",
    "projection_residual",
    "rank_k_error",
    "reconstruct_high",
    "save_ensemble",
    "select",
    "sweep",
    "synthetic_recovery_instance",
]
