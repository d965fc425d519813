"""Compare ensembles with samples of the predicted limit."""

from __future__ import annotations

import math

import numpy as np

from ..errors import GridUnsuitable, RegimeMismatch
from ..limits import HermiteDiscretization, hermite_process_ensemble, stable_cf, stable_sample
from ..regimes import (FiniteVarianceOutOfScope, HermiteLimit, LimitRegime, MixedLimit, ShortMemoryStable,
                       StableLimit, StableParams)
from ..rng import stream
from .config import load_thresholds
from .ensemble import Ensemble
from .stats import VerificationReport, ecf, ks_two_sample, theta_grid


def _stable_at(p: StableParams, t: float) -> StableParams:
    return StableParams(p.alpha, p.sigma * t ** (1 / p.alpha), p.beta, p.mu * t)


def hermite_marginal_disc(t: float, h_cells: int = 256) -> HermiteDiscretization:
    return HermiteDiscretization(times=(t,), h=t / h_cells)


def limit_sample(regime: LimitRegime, t: float, m: int, seed: int,
                 disc: HermiteDiscretization | None = None) -> np.ndarray:
    """``m`` draws of the predicted limit at time ``t``."""
    if isinstance(regime, (StableLimit, ShortMemoryStable)):
        return stable_sample(_stable_at(regime.params, t), m, stream(seed, "limit", "stable"))
    if isinstance(regime, HermiteLimit):
        disc = disc or hermite_marginal_disc(t)
        r = hermite_process_ensemble(regime.kappa, regime.H, disc, m, stream_seed(seed, "hermite"))[:, -1]
        return regime.f_kappa * r
    if isinstance(regime, MixedLimit):
        h = limit_sample(regime.hermite, t, m, seed, disc)
        s = limit_sample(regime.stable, t, m, seed)
        return regime.lam * h + s
    if isinstance(regime, FiniteVarianceOutOfScope):
        raise RegimeMismatch("no limit sampler for alpha >= 2")
    raise RegimeMismatch(f"unknown regime {regime!r}")


def stream_seed(seed: int, label: str) -> int:
    return int(stream(seed, "limit", label).integers(0, 2**63))


def verify_marginal(e: Ensemble, regime: LimitRegime, t: float = 1.0, ref_size: int | None = None,
                    seed: int | None = None, thresholds: dict | None = None) -> VerificationReport:
    th = thresholds or load_thresholds()
    x = e.column(t)
    m = ref_size or e.config.ref_size
    seed = e.seed if seed is None else seed
    ref = limit_sample(regime, t, m, seed)
    d, p = ks_two_sample(x, ref)
    level = th["ks_level"]
    passed = p > level
    details = {"regime": regime.to_dict(), "t": t, "ks_D": d}
    if isinstance(regime, (StableLimit, ShortMemoryStable)):
        grid = theta_grid(th["ecf_theta"])
        dist = float(np.max(np.abs(ecf(x, grid) - stable_cf(_stable_at(regime.params, t), grid))))
        details["ecf_sup"] = dist
        details["ecf_max"] = th["ecf_max"]
        passed = passed and dist <= th["ecf_max"]
    return VerificationReport("marginal_ks", d, p, level, bool(passed), {"ensemble": len(x), "reference": m},
                              details, e.config_hash, e.seed)


def _geometric_chain(grid) -> list[float]:
    pts = [t for t in grid if t > 0]
    best: list[float] = []
    for t0 in pts:
        chain = [t0]
        while any(abs(s - 2 * chain[-1]) < 1e-12 for s in pts):
            chain.append(2 * chain[-1])
        if len(chain) > len(best):
            best = chain
    return best


def iqr(x) -> float:
    q1, q3 = np.quantile(x, [0.25, 0.75])
    return float(q3 - q1)


def self_similarity_test(e: Ensemble, expected: float | None = None, tol: float | None = None,
                         thresholds: dict | None = None) -> VerificationReport:
    th = thresholds or load_thresholds()
    chain = _geometric_chain(e.grid)
    if len(chain) < 3:
        raise GridUnsuitable(f"grid {e.grid} has no geometric run t, 2t, 4t")
    if expected is None:
        expected = e.regime.exponent
        if expected is None:
            raise RegimeMismatch("regime has no scaling exponent")
    tol = th["slope_tol"] if tol is None else tol
    lt = np.log(chain)
    lq = np.log([iqr(e.column(t)) for t in chain])
    slope = float(np.polyfit(lt, lq, 1)[0])
    return VerificationReport("self_similarity", slope, None, tol, abs(slope - expected) <= tol,
                              {"M": e.values.shape[0], "times": len(chain)},
                              {"expected": expected, "times": chain}, e.config_hash, e.seed)


def variance_growth_slope(values_by_n: dict) -> float:
    ns = np.array(sorted(values_by_n))
    v = np.array([values_by_n[k] for k in ns])
    return float(np.polyfit(np.log(ns), np.log(v), 1)[0])


def null_ks_batch(p: StableParams, size: int, batches: int, seed: int, level: float = 0.01) -> dict:
    """KS p-values for ``batches`` pairs of same-law samples; pass rate and uniformity."""
    from scipy import stats

    pv = np.empty(batches)
    for b in range(batches):
        x = stable_sample(p, size, stream(seed, "null", b, 0))
        y = stable_sample(p, size, stream(seed, "null", b, 1))
        pv[b] = ks_two_sample(x, y)[1]
    return {
        "p_values": pv,
        "pass_rate": float(np.mean(pv > level)),
        "uniformity_p": float(stats.kstest(pv, "uniform").pvalue),
    }


__all__ = [
    "hermite_marginal_disc",
    "iqr",
    "limit_sample",
    "null_ks_batch",
    "self_similarity_test",
    "variance_growth_slope",
    "verify_marginal",
]
