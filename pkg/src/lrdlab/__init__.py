"""Partial sums of heavy-tailed functionals of long-range dependent Gaussian sequences."""

from .chaos import ChaosDecomposition, chaos_coefficients, chaos_variance_oracle, hermite_rank
from .functionals import AffineOf, HermiteFn, PowerAbs, SignedPower, functional_from_dict
from .limits import (HermiteDiscretization, ProcessPath, hermite_process_ensemble, hermite_process_sample,
                     stable_cf, stable_levy_path, stable_sample)
from .lrd import (CoefficientSeq, GaussianSample, LrdConfig, SlowlyVaryingSpec, autocovariances, build_coefficients,
                  effective_l1, sample_exact_path, sample_ma_path)
from .regimes import (HermiteLimit, MixedLimit, NormalizationPlan, StableLimit, StableParams, classify,
                      normalization_plan, psi_constant, regime_for, stable_sigma)
from .tails import NormingSequence, TailModel, fit_tail_model, norming_constant

__version__ = "0.1.0"

__all__ = [
    "AffineOf", "ChaosDecomposition", "CoefficientSeq", "GaussianSample", "HermiteDiscretization", "HermiteFn",
    "HermiteLimit", "LrdConfig", "MixedLimit", "NormalizationPlan", "NormingSequence", "PowerAbs", "ProcessPath",
    "SignedPower", "SlowlyVaryingSpec", "StableLimit", "StableParams", "TailModel", "autocovariances",
    "build_coefficients", "chaos_coefficients", "chaos_variance_oracle", "classify", "effective_l1",
    "fit_tail_model", "functional_from_dict", "hermite_process_ensemble", "hermite_process_sample", "hermite_rank",
    "normalization_plan", "norming_constant", "psi_constant", "regime_for", "sample_exact_path", "sample_ma_path",
    "stable_cf", "stable_levy_path", "stable_sample", "stable_sigma",
]
