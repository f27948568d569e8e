"""Parallel particle filtering via ensembles of independent filters.

The package provides the standard bootstrap and auxiliary particle filters,
an embarrassingly parallel ensemble runner that averages M fully independent
filters, the two-level island ("double bootstrap") comparator, benchmark
models (stochastic Lorenz 63, a lattice of excitable FitzHugh-Nagumo nodes)
with exact-filter oracles (Kalman, finite-state HMM), and a benchmark /
verification harness built around them.
"""

from .core import (
    ParticleApproximation,
    StateSpaceModel,
    estimate_integral,
    normalize_log_weights,
    posterior_mean,
)
from .ensemble import (
    EnsembleOutput,
    ensemble_estimate,
    run_ensemble,
    time_error_index,
)
from .exceptions import (
    ConfigError,
    NumericalDivergenceError,
    UnsupportedModelError,
    WeightCollapseError,
)
from .filters import (
    FilterOutput,
    IslandSystem,
    apf_step,
    bf_init,
    bf_step,
    dbf_init,
    dbf_step,
    run_double_bootstrap,
    run_filter,
)
from .metrics import MetricRecord, bias_variance, empirical_mse, loglog_slope
from .resampling import (
    multinomial_resample,
    multinomial_resample_indices,
    systematic_resample,
    systematic_resample_indices,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EnsembleOutput",
    "FilterOutput",
    "IslandSystem",
    "MetricRecord",
    "NumericalDivergenceError",
    "ParticleApproximation",
    "StateSpaceModel",
    "UnsupportedModelError",
    "WeightCollapseError",
    "apf_step",
    "bf_init",
    "bf_step",
    "bias_variance",
    "dbf_init",
    "dbf_step",
    "empirical_mse",
    "ensemble_estimate",
    "estimate_integral",
    "loglog_slope",
    "multinomial_resample",
    "multinomial_resample_indices",
    "normalize_log_weights",
    "posterior_mean",
    "run_double_bootstrap",
    "run_ensemble",
    "run_filter",
    "systematic_resample",
    "systematic_resample_indices",
    "time_error_index",
]
