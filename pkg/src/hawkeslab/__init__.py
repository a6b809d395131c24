"""hawkeslab: simulation and verification lab for multivariate compound
Hawkes processes with exponential kernels.

Exact Ogata-thinning simulation of the marked process (with a compiled hot
kernel and a bitwise-identical pure-Python fallback), closed-form moment and
limit-covariance engines, and a reproducible Monte Carlo harness that checks
the Gaussian limit behaviour of the normalized loss functionals.
"""

from ._backend import available_backends, get_kernel
from .coupling import TildeConfig, simulate_tilde, tilde_mean
from .errors import (
    HawkesLabError,
    IndefiniteMatrixError,
    ModelValidationError,
    RunawayProcessError,
    SingularMatrixError,
)
from .mc import (
    ExperimentConfig,
    ExperimentSummary,
    histogram2d,
    run_experiment,
    sample_gaussian,
)
from .model import (
    HawkesModel,
    MarkDistribution,
    StabilityReport,
    mark_moments,
    validate,
)
from .moments import (
    MomentSet,
    deterministic_remainder,
    gaussian_test_expectation,
    integrated_mean_intensity,
    limit_covariances,
    mean_intensity,
    multimarginal_covariance,
)
from .simulator import (
    SimulatedPath,
    intensity_at,
    intensity_on_grid,
    simulate,
)
from .statistics import (
    CltSample,
    batch_covariance,
    compensated_gaps,
    compute_clt_sample,
    decomposition_residual,
)

__version__ = "0.1.0"

__all__ = [
    "CltSample",
    "ExperimentConfig",
    "ExperimentSummary",
    "HawkesLabError",
    "HawkesModel",
    "IndefiniteMatrixError",
    "MarkDistribution",
    "ModelValidationError",
    "MomentSet",
    "RunawayProcessError",
    "SimulatedPath",
    "SingularMatrixError",
    "StabilityReport",
    "TildeConfig",
    "available_backends",
    "batch_covariance",
    "compensated_gaps",
    "compute_clt_sample",
    "decomposition_residual",
    "deterministic_remainder",
    "gaussian_test_expectation",
    "get_kernel",
    "histogram2d",
    "integrated_mean_intensity",
    "intensity_at",
    "intensity_on_grid",
    "limit_covariances",
    "mark_moments",
    "mean_intensity",
    "multimarginal_covariance",
    "run_experiment",
    "sample_gaussian",
    "simulate",
    "simulate_tilde",
    "tilde_mean",
    "validate",
]
