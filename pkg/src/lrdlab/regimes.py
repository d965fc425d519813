"""Which limit the normalised partial sums of ``f(X_i)`` have, and how to normalise.

With Hermite rank ``kappa``, Hurst index ``H`` and tail index ``alpha`` the
chaos part grows like ``n**(1 - kappa(1-H))`` and the heavy-tailed part like
``a_n = n**(1/alpha) L3(n)``; whichever is larger wins, and on the boundary
both survive with relative weight ``lambda = lim L1(n)**kappa / L3(n)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .chaos import chaos_coefficients
from .errors import InvalidParameter, RegimeMismatch
from .functionals import FunctionalSpec
from .lrd import LrdConfig, SlowlyVaryingSpec, effective_l1
from .tails import NormingSequence, TailModel, truncated_mean

BOUNDARY_RTOL = 1e-12
EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class StableParams:
    """``S_alpha(sigma, beta, mu)``; see ``limits.stable_cf`` for the law."""

    alpha: float
    sigma: float = 1.0
    beta: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise InvalidParameter(f"alpha = {self.alpha} outside (0, 2)")
        if not self.sigma > 0:
            raise InvalidParameter(f"sigma = {self.sigma} must be positive")
        if not -1 <= self.beta <= 1:
            raise InvalidParameter(f"beta = {self.beta} outside [-1, 1]")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "sigma": self.sigma, "beta": self.beta, "mu": self.mu}


@dataclass(frozen=True)
class HermiteLimit:
    kappa: int
    H: float
    f_kappa: float = 1.0
    name = "Hermite"

    @property
    def H_ss(self) -> float:
        return 1 - self.kappa * (1 - self.H)

    @property
    def exponent(self) -> float:
        return self.H_ss

    def describe(self) -> str:
        return f"f_kappa * R(t), Hermite process of order {self.kappa}, base H = {self.H}, self-similarity {self.H_ss:.6g}"

    def to_dict(self) -> dict:
        return {"regime": self.name, "kappa": self.kappa, "H": self.H, "H_ss": self.H_ss,
                "f_kappa": self.f_kappa, "exponent": self.exponent, "limit": self.describe()}


@dataclass(frozen=True)
class StableLimit:
    params: StableParams
    centering: str | None = None  # None or "TruncatedMeanPlusPsi"
    name = "Stable"

    @property
    def exponent(self) -> float:
        return 1 / self.params.alpha

    def describe(self) -> str:
        p = self.params
        s = f"alpha-stable Levy motion, S_{p.alpha:.6g}(sigma={p.sigma:.6g}, beta={p.beta:g}, 0) at t = 1"
        if self.centering:
            s += "; terms centred by truncated means, path shifted by the index-one drift"
        return s

    def to_dict(self) -> dict:
        return {"regime": self.name, "stable": self.params.to_dict(), "centering": self.centering,
                "exponent": self.exponent, "limit": self.describe()}


@dataclass(frozen=True)
class MixedLimit:
    lam: float
    hermite: HermiteLimit
    stable: StableLimit
    name = "Mixed"

    @property
    def exponent(self) -> float:
        return self.stable.exponent

    def describe(self) -> str:
        return f"lambda f_kappa R(t) + R*(t) with lambda = {self.lam:.6g}, independent summands"

    def to_dict(self) -> dict:
        return {"regime": self.name, "lambda": self.lam, "hermite": self.hermite.to_dict(),
                "stable": self.stable.to_dict(), "exponent": self.exponent, "limit": self.describe()}


@dataclass(frozen=True)
class FiniteVarianceOutOfScope:
    alpha: float
    name = "FiniteVarianceOutOfScope"
    exponent = None

    def to_dict(self) -> dict:
        return {"regime": self.name, "alpha": self.alpha, "exponent": None,
                "limit": "alpha >= 2: finite-variance theory, not covered"}


@dataclass(frozen=True)
class ShortMemoryStable:
    params: StableParams
    H: float
    name = "ShortMemoryStable"

    @property
    def exponent(self) -> float:
        return 1 / self.params.alpha

    def to_dict(self) -> dict:
        return {"regime": self.name, "H": self.H, "stable": self.params.to_dict(),
                "exponent": self.exponent, "limit": "H <= 1/2: stable Levy motion"}


LimitRegime = Union[HermiteLimit, StableLimit, MixedLimit, FiniteVarianceOutOfScope, ShortMemoryStable]


def stable_sigma(alpha: float) -> float:
    """Scale of the stable limit under ``P(|f| > a_n) = 1/n`` normalisation."""
    if not 0 < alpha < 2:
        raise InvalidParameter(f"alpha = {alpha} outside (0, 2)")
    if alpha == 1:
        return math.pi / 2
    return (math.gamma(2 - alpha) * math.cos(math.pi * alpha / 2) / (1 - alpha)) ** (1 / alpha)


# ---------------------------------------------------------------------------
# psi = ln(pi) + int_0^inf u**-2 (sin u - u 1(u <= 1)) du


def _psi_head(tol: float) -> float:
    # (sin u - u)/u**2 -> 0 at 0; quad never evaluates the endpoint
    return integrate.quad(lambda u: (math.sin(u) - u) / (u * u), 0.0, 1.0, epsabs=tol / 4, epsrel=0, limit=200)[0]


def psi_by_parts(tol: float = 1e-12) -> float:
    """Head by quadrature; tail ``int_1^inf sin u/u**2 = sin 1 - Ci(1)`` by parts."""
    _, ci = special.sici(1.0)
    return math.log(math.pi) + _psi_head(tol) + math.sin(1.0) - float(ci)


def psi_fourier(tol: float = 1e-12) -> float:
    """Head by quadrature; tail by the QAWF Fourier-integral rule."""
    tail = integrate.quad(lambda u: 1.0 / (u * u), 1.0, np.inf, weight="sin", wvar=1.0, epsabs=tol / 4, limlst=200)[0]
    return math.log(math.pi) + _psi_head(tol) + tail


def psi_closed_form() -> float:
    return math.log(math.pi) + 1 - EULER_GAMMA


def psi_constant(tol: float = 1e-10) -> float:
    if tol < 1e-12:
        raise InvalidParameter("tol must be >= 1e-12")
    return psi_by_parts(tol)


# ---------------------------------------------------------------------------
# classification


def _as_fraction(x) -> Fraction | None:
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return Fraction(x)
    return None


def on_boundary(kappa: int, H, alpha) -> int:
    """Sign of ``(1 - kappa(1-H)) - 1/alpha``, with 0 on the boundary."""
    fh, fa = _as_fraction(H), _as_fraction(alpha)
    if fh is not None and fa is not None:
        d = (1 - kappa * (1 - fh)) - 1 / fa
        return (d > 0) - (d < 0)
    hss = 1 - kappa * (1 - float(H))
    inv = 1 / float(alpha)
    d = hss - inv
    if abs(d) <= BOUNDARY_RTOL * max(abs(hss), abs(inv)):
        return 0
    return 1 if d > 0 else -1


def classify(kappa: int | None, H, alpha, lam: float | None = None, beta: float = 1.0,
             f_kappa: float = 1.0) -> LimitRegime:
    """Limit regime for rank ``kappa`` (None when undefined), ``H``, ``alpha``, ``lambda``."""
    Hf, af = float(H), float(alpha)
    if not 0 < Hf < 1:
        raise InvalidParameter(f"H = {Hf} outside (0, 1)")
    if not af > 0:
        raise InvalidParameter(f"alpha = {af} must be positive")
    if kappa is not None and (int(kappa) != kappa or kappa < 1):
        raise InvalidParameter(f"kappa = {kappa} must be a positive integer or None")
    if lam is not None and not lam >= 0:
        raise InvalidParameter(f"lambda = {lam} must lie in [0, inf]")
    if af >= 2:
        return FiniteVarianceOutOfScope(af)
    params = StableParams(af, stable_sigma(af), beta, 0.0)
    if Hf <= 0.5:
        return ShortMemoryStable(params, Hf)
    stable = StableLimit(params, "TruncatedMeanPlusPsi" if af == 1 else None)
    if af <= 1 or kappa is None:
        return stable
    herm = HermiteLimit(int(kappa), Hf, f_kappa)
    side = on_boundary(int(kappa), H, alpha)
    if side > 0:
        return herm
    if side < 0:
        return stable
    if lam is None:
        raise InvalidParameter("on the boundary the weight lambda is required")
    if lam == 0:
        return stable
    if math.isinf(lam):
        return herm
    return MixedLimit(float(lam), herm, stable)


def lambda_limit(l1: SlowlyVaryingSpec, kappa: int, l3: SlowlyVaryingSpec) -> float:
    """``lim L1(n)**kappa / L3(n)`` from the log-power exponents."""
    e = kappa * l1.p - l3.p
    if e > 0:
        return math.inf
    if e < 0:
        return 0.0
    return l1.c**kappa / l3.c


# ---------------------------------------------------------------------------
# normalisation


@dataclass(frozen=True, eq=False)
class NormalizationPlan:
    """``S_n(t) = scale(n) * (sum_{i <= nt} f(X_i) - nt * term_centering(n)) - drift(t)``."""

    regime: LimitRegime
    scale: Callable[[int], float]
    term_centering: Callable[[int], float]
    drift: Callable[[float], float]
    target: str
    info: dict

    def centering(self, n: int, t: float) -> float:
        """Total subtracted from the scaled sum at time ``t``."""
        k = math.floor(n * t)
        return self.scale(n) * k * self.term_centering(n) + self.drift(t)

    def apply(self, partial_sums: np.ndarray, n: int, t_grid) -> np.ndarray:
        """Normalise rows of running sums ``S[..., k]`` (``k = 0..n``) at ``t_grid``."""
        idx = np.floor(np.asarray(t_grid, dtype=float) * n + 1e-9).astype(int)
        s = self.scale(n)
        m = self.term_centering(n)
        d = np.array([self.drift(t) for t in t_grid])
        return s * (partial_sums[..., idx] - idx * m) - d

    def to_dict(self, n: int | None = None) -> dict:
        d = {"regime": self.regime.to_dict(), "target": self.target, **self.info}
        if n is not None:
            d["scale_at_n"] = self.scale(n)
            d["term_centering_at_n"] = self.term_centering(n)
            d["n"] = n
        return d

    def to_json(self, n: int | None = None) -> str:
        return json.dumps(self.to_dict(n), indent=2)


ALPHA1_DRIFTS = ("psi", "levy")


def alpha1_drift_rate(beta: float, mode: str = "psi", tol: float = 1e-10) -> float:
    """Per-unit-time drift removed after truncated-mean centering at index one.

    ``psi``: ``2 psi / pi``. ``levy``: ``beta (1 - gamma)``, the shift that
    makes the limit exactly ``S_1(pi/2, beta, 0)`` when ``a_n`` solves
    ``P(|f| > a_n) = 1/n``.
    """
    if mode == "psi":
        return 2 * psi_constant(tol) / math.pi
    if mode == "levy":
        return beta * (1 - EULER_GAMMA)
    raise InvalidParameter(f"unknown drift mode {mode!r}; choose from {ALPHA1_DRIFTS}")


def normalization_plan(regime: LimitRegime, f: FunctionalSpec, lrd: LrdConfig, tail: TailModel | None,
                       n_max: int | None = None, alpha1_drift: str = "psi",
                       truncated: bool = False) -> NormalizationPlan:
    """Scale, centering and drift for ``regime``.

    ``truncated`` selects the slowly varying factor of the truncated moving
    average instead of the infinite one (they differ by the normalising
    constant only).
    """
    if isinstance(regime, FiniteVarianceOutOfScope):
        raise RegimeMismatch("no plan for alpha >= 2")
    zero = lambda n: 0.0
    nodrift = lambda t: 0.0
    if isinstance(regime, HermiteLimit):
        if abs(lrd.H - regime.H) > 1e-12:
            raise RegimeMismatch(f"regime H = {regime.H} but sequence H = {lrd.H}")
        l1 = effective_l1(lrd, truncated)
        k, hss = regime.kappa, regime.H_ss
        scale = lambda n: float(l1(n)) ** -k * float(n) ** -hss
        info = {"scale": f"L1(n)^-{k} n^-{hss:.6g}", "l1_effective": l1.to_dict()}
        return NormalizationPlan(regime, scale, zero, nodrift, regime.describe(), info)
    if tail is None:
        raise RegimeMismatch("stable normalisation needs a tail model")
    st = regime.stable if isinstance(regime, MixedLimit) else regime
    if abs(st.params.alpha - tail.alpha) > 1e-9 * tail.alpha:
        raise RegimeMismatch(f"regime alpha {st.params.alpha} but tail alpha {tail.alpha}")
    a_n = NormingSequence(f)
    scale = lambda n: 1.0 / a_n(n)
    info = {"scale": "1/a_n", "alpha": tail.alpha, "beta": tail.beta, "sigma": st.params.sigma}
    if isinstance(regime, MixedLimit):
        info["lambda"] = regime.lam
        return NormalizationPlan(regime, scale, zero, nodrift, regime.describe(), info)
    if st.centering == "TruncatedMeanPlusPsi":
        rate = alpha1_drift_rate(tail.beta, alpha1_drift)
        info.update({"alpha1_drift_mode": alpha1_drift, "drift_rate": rate, "psi": psi_constant(1e-10)})
        term = lambda n: truncated_mean(f, a_n(n))
        return NormalizationPlan(regime, scale, term, lambda t: rate * t, regime.describe(), info)
    return NormalizationPlan(regime, scale, zero, nodrift, regime.describe(), info)


def regime_for(f: FunctionalSpec, lrd: LrdConfig, tail: TailModel, lam: float | None = None,
               truncated: bool = False) -> LimitRegime:
    """Classify from the objects themselves: rank, ``H``, tail index, and ``lambda``."""
    from .chaos import rank_or_none

    kappa = rank_or_none(f)
    f_kappa = float(chaos_coefficients(f).coeffs[kappa]) if kappa is not None else 1.0
    if lam is None and kappa is not None and tail.alpha > 1 and lrd.H > 0.5 \
            and on_boundary(kappa, lrd.H, tail.alpha) == 0:
        lam = lambda_limit(effective_l1(lrd, truncated), kappa, tail.l3)
    return classify(kappa, lrd.H, tail.alpha, lam, tail.beta, f_kappa)


def regime_from_dict(d: dict) -> LimitRegime:
    name = d.get("regime")
    if name == "Hermite":
        return HermiteLimit(int(d["kappa"]), float(d["H"]), float(d.get("f_kappa", 1.0)))
    if name == "Stable":
        return StableLimit(StableParams(**d["stable"]), d.get("centering"))
    if name == "Mixed":
        return MixedLimit(float(d["lambda"]), regime_from_dict(d["hermite"]), regime_from_dict(d["stable"]))
    raise InvalidParameter(f"cannot build a regime from {name!r}")


__all__ = [
    "ALPHA1_DRIFTS",
    "FiniteVarianceOutOfScope",
    "HermiteLimit",
    "LimitRegime",
    "MixedLimit",
    "NormalizationPlan",
    "ShortMemoryStable",
    "StableLimit",
    "StableParams",
    "alpha1_drift_rate",
    "classify",
    "lambda_limit",
    "normalization_plan",
    "on_boundary",
    "psi_by_parts",
    "psi_closed_form",
    "psi_constant",
    "psi_fourier",
    "regime_for",
    "regime_from_dict",
    "stable_sigma",
]
