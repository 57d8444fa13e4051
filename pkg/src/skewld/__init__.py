"""Langevin sampling with detailed-balance-violating drifts.

The stationary density of an overdamped Langevin sampler survives the
addition of a drift whose probability flow is divergence free.  This
package implements those drifts for single chains (gradient rotation,
circular component coupling, antisymmetric matrices) and for replicated
chains coupled through exchanged minibatch gradients, together with a
tied-mean Gaussian-mixture benchmark whose posterior is known on a grid,
convergence diagnostics, and a CLI for reproducible experiments.
"""

__version__ = "0.1.0"

from .diagnostics import (
    DEFAULT_BENCHMARK_GRID,
    DEFAULT_KL_SMOOTHING,
    DEFAULT_MODE_RADIUS,
    DEFAULT_MODES,
    AutocorrelationResult,
    ComponentAutocorr,
    DiagnosticsReport,
    GridDensity,
    GridSpec,
    autocorrelation,
    build_report,
    grid_density_from_log,
    grid_posterior,
    histogram2d,
    integrated_autocorr,
    kl_divergence,
    mode_occupancy,
)
from .dynamics import (
    FORCE_KINDS,
    ForceSpec,
    NoiseSpec,
    build_force,
    divergence_check,
    langevin_step,
    plain_force,
    replica_force,
    skew_force_2d,
    skew_force_circular,
    skew_force_matrix,
)
from .estimator import SkewSGLD
from .model import (
    GENERATION_MODES,
    LIKELIHOOD_SCALES,
    Dataset,
    ModelSpec,
    evidence,
    generate_data,
    grad_log_lik,
    grad_log_prior,
    likelihood_weight,
    log_lik,
    log_prior,
    log_unnorm_posterior,
)
from .sampler import (
    BatchPolicy,
    ReplicaConfig,
    RunConfig,
    StepSchedule,
    Trace,
    batch_iterator,
    batch_stream,
    noise_stream,
    run,
    run_replicated,
    run_single,
    solve_schedule,
)
from .validation import ConfigurationError, DiagnosticError, DivergenceError

__all__ = [
    "__version__",
    "AutocorrelationResult",
    "BatchPolicy",
    "ComponentAutocorr",
    "ConfigurationError",
    "Dataset",
    "DEFAULT_BENCHMARK_GRID",
    "DEFAULT_KL_SMOOTHING",
    "DEFAULT_MODE_RADIUS",
    "DEFAULT_MODES",
    "DiagnosticError",
    "DiagnosticsReport",
    "DivergenceError",
    "FORCE_KINDS",
    "ForceSpec",
    "GENERATION_MODES",
    "GridDensity",
    "GridSpec",
    "LIKELIHOOD_SCALES",
    "ModelSpec",
    "NoiseSpec",
    "ReplicaConfig",
    "RunConfig",
    "SkewSGLD",
    "StepSchedule",
    "Trace",
    "autocorrelation",
    "batch_iterator",
    "batch_stream",
    "build_force",
    "build_report",
    "divergence_check",
    "evidence",
    "generate_data",
    "grad_log_lik",
    "grad_log_prior",
    "grid_density_from_log",
    "grid_posterior",
    "histogram2d",
    "integrated_autocorr",
    "kl_divergence",
    "langevin_step",
    "likelihood_weight",
    "log_lik",
    "log_prior",
    "log_unnorm_posterior",
    "mode_occupancy",
    "noise_stream",
    "plain_force",
    "replica_force",
    "run",
    "run_replicated",
    "run_single",
    "skew_force_2d",
    "skew_force_circular",
    "skew_force_matrix",
    "solve_schedule",
]
