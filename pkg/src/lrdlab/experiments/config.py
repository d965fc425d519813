"""Experiment configuration and the shared threshold table."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources

from ..errors import ConfigError, InvalidParameter
from ..functionals import FunctionalSpec, PowerAbs, functional_from_dict
from ..lrd import LrdConfig
from ..rng import config_hash

MIN_N = 2**10
MIN_PATHS = 100


def load_thresholds(overrides: dict | None = None) -> dict:
    base = json.loads(resources.files("lrdlab.data").joinpath("thresholds.json").read_text())
    for k, v in (overrides or {}).items():
        if k not in base:
            raise ConfigError(f"unknown threshold {k!r}")
        base[k] = v
    return base


def default_threads() -> int:
    env = os.environ.get("LRDLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"LRDLAB_THREADS={env!r} is not an integer") from None
    return max(1, min(8, os.cpu_count() or 1))


@dataclass(frozen=True)
class ExperimentConfig:
    functional: FunctionalSpec
    lrd: LrdConfig
    n: int = 2**14
    grid: tuple = (0.0, 0.25, 0.5, 1.0)
    M: int = 2000
    seed: int = 0
    regime_override: dict | None = None
    generator: str = "exact"  # "exact" (untruncated, circulant) or "ma" (truncated convolution)
    alpha1_drift: str = "psi"
    lam: float | None = None
    ref_size: int = 2000
    tail_overrides: dict | None = None
    threads: int | None = field(default=None, compare=False)

    def __post_init__(self):
        g = tuple(float(t) for t in self.grid)
        if not g or g[0] != 0.0:
            g = (0.0,) + g
        object.__setattr__(self, "grid", g)
        if self.n < MIN_N:
            raise InvalidParameter(f"n = {self.n} below {MIN_N}")
        if self.M < MIN_PATHS:
            raise InvalidParameter(f"M = {self.M} below {MIN_PATHS}")
        if any(b <= a for a, b in zip(g, g[1:])) or g[-1] > 1:
            raise InvalidParameter("grid must be increasing inside [0, 1]")
        if self.generator not in ("exact", "ma"):
            raise InvalidParameter(f"unknown generator {self.generator!r}")

    @property
    def prepared_functional(self) -> FunctionalSpec:
        """``|x|^r`` with ``-1 < r < 0`` is centred before summing."""
        f = self.functional
        if isinstance(f, PowerAbs) and -1 < f.r < 0 and not f.centered:
            return PowerAbs(f.r, True)
        return f

    def to_dict(self) -> dict:
        return {
            "functional": self.functional.to_dict(),
            "lrd": self.lrd.to_dict(),
            "n": self.n,
            "grid": list(self.grid),
            "M": self.M,
            "seed": self.seed,
            "regime_override": self.regime_override,
            "generator": self.generator,
            "alpha1_drift": self.alpha1_drift,
            "lam": self.lam,
            "ref_size": self.ref_size,
            "tail_overrides": self.tail_overrides,
        }

    @classmethod
    def from_dict(cls, d: dict, threads: int | None = None) -> "ExperimentConfig":
        known = {"functional", "lrd", "n", "grid", "M", "seed", "regime_override", "generator",
                 "alpha1_drift", "lam", "ref_size", "tail_overrides"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        kw = {k: d[k] for k in known if k in d}
        kw["functional"] = functional_from_dict(d["functional"])
        kw["lrd"] = LrdConfig.from_dict(d["lrd"])
        if "grid" in kw:
            kw["grid"] = tuple(kw["grid"])
        return cls(threads=threads, **kw)

    def hash(self) -> str:
        return config_hash(self.to_dict())
