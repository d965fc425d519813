"""Monte Carlo verification harness."""

from .config import ExperimentConfig, default_threads, load_thresholds
from .ensemble import Ensemble, build_plan, map_replicas, partial_sum_ensemble, replica_values, resolve_regime
from .exceedances import (PointPattern, Rectangle, exceedance_pattern, extremal_index_estimate, max_level_curve,
                          moving_maximum, poisson_intensity_test)
from .stats import VerificationReport, ecf, ks_pvalue, ks_statistic, ks_two_sample
from .sweep import SWEEP_COLUMNS, boundary_annotation, power_example_sweep, sweep_csv
from .verify import (hermite_marginal_disc, iqr, limit_sample, null_ks_batch, self_similarity_test,
                     variance_growth_slope, verify_marginal)

__all__ = [
    "Ensemble",
    "ExperimentConfig",
    "PointPattern",
    "Rectangle",
    "SWEEP_COLUMNS",
    "VerificationReport",
    "boundary_annotation",
    "build_plan",
    "default_threads",
    "ecf",
    "exceedance_pattern",
    "extremal_index_estimate",
    "hermite_marginal_disc",
    "iqr",
    "ks_pvalue",
    "ks_statistic",
    "ks_two_sample",
    "limit_sample",
    "load_thresholds",
    "map_replicas",
    "max_level_curve",
    "moving_maximum",
    "null_ks_batch",
    "partial_sum_ensemble",
    "poisson_intensity_test",
    "power_example_sweep",
    "replica_values",
    "resolve_regime",
    "self_similarity_test",
    "sweep_csv",
    "variance_growth_slope",
    "verify_marginal",
]
