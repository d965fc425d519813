"""Normalised partial-sum ensembles."""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import signal

from ..chaos import chaos_coefficients, rank_or_none
from ..errors import ConfigError, NoPowerTail, RegimeMismatch
from ..lrd import SlowlyVaryingSpec, build_coefficients, exact_path_sampler
from ..regimes import HermiteLimit, LimitRegime, NormalizationPlan, normalization_plan, regime_for, regime_from_dict
from ..rng import stream
from ..tails import TailModel, fit_tail_model
from .config import ExperimentConfig, default_threads


@dataclass(frozen=True, eq=False)
class Ensemble:
    values: np.ndarray  # (M, len(grid))
    grid: tuple
    plan: NormalizationPlan
    regime: LimitRegime
    config: ExperimentConfig
    config_hash: str
    seed: int

    @property
    def n(self) -> int:
        return self.config.n

    def column(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(np.asarray(self.grid) - t)))
        if abs(self.grid[i] - t) > 1e-12:
            raise KeyError(f"t = {t} not on the grid {self.grid}")
        return self.values[:, i]

    def provenance(self) -> dict:
        return {"config_hash": self.config_hash, "seed": self.seed, "M": self.values.shape[0], "n": self.n}


def sequence_sampler(cfg: ExperimentConfig):
    """``draw(rng) -> X_1..X_n`` for the configured generator."""
    if cfg.generator == "exact":
        return exact_path_sampler(cfg.lrd, cfg.n)
    coeffs = build_coefficients(cfg.lrd)
    b = coeffs.b

    def draw(rng):
        xi = rng.standard_normal(cfg.n + len(b) - 1)
        return signal.fftconvolve(xi, b, mode="valid")

    return draw


def replica_values(cfg: ExperimentConfig, i: int, draw=None) -> np.ndarray:
    """``f(X_1..X_n)`` for replica ``i``; depends only on ``(seed, i)``."""
    draw = draw or sequence_sampler(cfg)
    x = draw(stream(cfg.seed, "paths", i))
    return np.asarray(cfg.prepared_functional(x), dtype=float)


def map_replicas(cfg: ExperimentConfig, fn, threads: int | None = None) -> list:
    """``[fn(i, f(X) of replica i) for i < M]`` in replica order."""
    draw = sequence_sampler(cfg)
    threads = threads or cfg.threads or default_threads()
    work = lambda i: fn(i, replica_values(cfg, i, draw))
    if threads == 1:
        return [work(i) for i in range(cfg.M)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(work, range(cfg.M)))


def override_tail(tail: TailModel | None, over: dict) -> TailModel:
    unknown = set(over) - {"alpha", "beta", "l2", "x_min"}
    if unknown:
        raise ConfigError(f"unknown tail_overrides keys: {sorted(unknown)}")
    base = tail.to_dict() if tail else {"x_min": 1.0, "l2": {"c": 1.0, "p": 0.0}}
    base.update(over)
    if "alpha" not in base or "beta" not in base:
        raise ConfigError("tail_overrides must give alpha and beta for a light-tailed functional")
    l2 = SlowlyVaryingSpec.from_dict(base["l2"])
    return TailModel(float(base["alpha"]), float(base["beta"]), l2, float(base["x_min"]), {"method": "override"})


def resolve_regime(cfg: ExperimentConfig) -> tuple[LimitRegime, TailModel | None]:
    """Regime and tail model; a light-tailed ``f`` gets the non-central limit when it exists."""
    f = cfg.prepared_functional
    try:
        tail = fit_tail_model(f)
    except NoPowerTail:
        tail = None
    if cfg.tail_overrides:
        tail = override_tail(tail, cfg.tail_overrides)
    if cfg.regime_override:
        return regime_from_dict(cfg.regime_override), tail
    if tail is None:
        kappa, fk = rank_and_coefficient(f)
        if kappa is None or kappa * (1 - cfg.lrd.H) >= 0.5:
            raise RegimeMismatch("light-tailed f with short-range chaos: Gaussian limit, not covered")
        return HermiteLimit(kappa, cfg.lrd.H, fk), None
    return regime_for(f, cfg.lrd, tail, cfg.lam, truncated=cfg.generator == "ma"), tail


def build_plan(cfg: ExperimentConfig) -> NormalizationPlan:
    regime, tail = resolve_regime(cfg)
    return normalization_plan(regime, cfg.prepared_functional, cfg.lrd, tail, cfg.n, cfg.alpha1_drift,
                              truncated=cfg.generator == "ma")


def partial_sum_ensemble(cfg: ExperimentConfig, threads: int | None = None) -> Ensemble:
    plan = build_plan(cfg)
    n = cfg.n
    # warm every cache before threads start
    plan.scale(n), plan.term_centering(n)

    def one(i, v):
        cs = np.concatenate([[0.0], np.cumsum(v)])
        return plan.apply(cs, n, cfg.grid)

    rows = map_replicas(cfg, one, threads)
    return Ensemble(np.vstack(rows), cfg.grid, plan, plan.regime, cfg, cfg.hash(), cfg.seed)


@functools.lru_cache(maxsize=32)
def rank_and_coefficient(f) -> tuple[int | None, float]:
    k = rank_or_none(f)
    return k, (float(chaos_coefficients(f).coeffs[k]) if k else float("nan"))
