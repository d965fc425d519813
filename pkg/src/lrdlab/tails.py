"""Power tails of ``f(X)`` for standard normal ``X``.

``P(|f(X)| > x) ~ L2(x) x**-alpha`` with the positive tail carrying a share
``(1 + beta)/2``. Probabilities are evaluated exactly by inverting ``f`` on its
monotone pieces, so the norming constants ``a_n`` and the truncated moments can
be checked to near machine precision.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special

from .errors import NoPowerTail, NTooSmall, UnsupportedFunctional
from .functionals import AffineOf, FunctionalSpec, HermiteFn, PowerAbs, SignedPower, base_power
from .lrd import SlowlyVaryingSpec

_L2_POWER = math.sqrt(2 / math.pi)  # P(|X| < e) ~ sqrt(2/pi) e
FIT_DECADES = (2.0, 6.0)
FIT_POINTS_PER_DECADE = 40
DRIFT_TOL = 0.01


@dataclass(frozen=True)
class TailModel:
    alpha: float
    beta: float
    l2: SlowlyVaryingSpec
    x_min: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise NoPowerTail(f"tail index {self.alpha} outside (0, 2)")
        if not -1 <= self.beta <= 1:
            raise ValueError(f"beta = {self.beta} outside [-1, 1]")

    @property
    def l3(self) -> SlowlyVaryingSpec:
        """Slowly varying part of ``a_n = n**(1/alpha) L3(n)``.

        Exact for constant ``L2``; for the log-power family this keeps the
        leading behaviour ``L2(n**(1/alpha))**(1/alpha)``.
        """
        a = self.alpha
        c = self.l2.c ** (1 / a) * (1 / a) ** (self.l2.p / a)
        return SlowlyVaryingSpec(c, self.l2.p / a)

    def prob_abs_greater(self, x):
        return self.l2(x) * np.asarray(x, dtype=float) ** -self.alpha

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "l2": self.l2.to_dict(),
            "x_min": self.x_min,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def tail_probabilities(f: FunctionalSpec, x: float) -> tuple[float, float]:
    """``(P(f(X) > x), P(f(X) < -x))``."""
    if not x > 0:
        raise ValueError("x must be positive")
    return f.prob_greater(x), f.prob_less(-x)


def prob_abs_greater(f: FunctionalSpec, x: float) -> float:
    p, m = tail_probabilities(f, x)
    return p + m


def _analytic_model(f: FunctionalSpec) -> TailModel | None:
    bp = base_power(f)
    if bp is None:
        return None
    g, a, _ = bp
    if g.r > 0:
        raise NoPowerTail(f"r = {g.r} > 0 gives Gaussian-type tails")
    alpha = -1.0 / g.r
    if alpha >= 2:
        raise NoPowerTail(f"alpha = {alpha} >= 2 is in the finite-variance domain")
    beta = 1.0 if isinstance(g, PowerAbs) else 0.0
    if a < 0:
        beta = -beta
    l2 = SlowlyVaryingSpec.constant(_L2_POWER * abs(a) ** alpha)
    return TailModel(alpha, beta, l2, x_min=1.0, diagnostics={"method": "analytic"})


def _slope(logx: np.ndarray, logp: np.ndarray, w: np.ndarray) -> tuple[float, float, float]:
    W = w / w.sum()
    mx, my = W @ logx, W @ logp
    sxx = W @ (logx - mx) ** 2
    sxy = W @ ((logx - mx) * (logp - my))
    slope = sxy / sxx
    resid = logp - my - slope * (logx - mx)
    r2 = 1 - (W @ resid**2) / (W @ (logp - my) ** 2)
    return float(slope), float(my - slope * mx), float(r2)


def regression_alpha(f: FunctionalSpec, lo_decade: float, hi_decade: float, per_decade: int = FIT_POINTS_PER_DECADE):
    """Weighted log-log fit of ``P(|f| > x)`` over ``[10**lo, 10**hi]``."""
    m = int(round((hi_decade - lo_decade) * per_decade)) + 1
    xs = np.logspace(lo_decade, hi_decade, m)
    p = np.array([prob_abs_greater(f, x) for x in xs])
    if np.any(p <= 0) or not np.all(np.isfinite(p)):
        raise NoPowerTail("tail probability underflows on the fitting grid")
    # weights ~ 1/(relative error of log p); analytic p so uniform up to rounding
    w = np.ones_like(p)
    slope, icpt, r2 = _slope(np.log(xs), np.log(p), w)
    return -slope, icpt, r2


def fit_tail_model(f: FunctionalSpec) -> TailModel:
    """Tail index, skewness and ``L2``; analytic for power families."""
    model = _analytic_model(f)
    if model is not None:
        return model
    lo, hi = FIT_DECADES
    mid = 0.5 * (lo + hi)
    try:
        a_all, icpt, r2 = regression_alpha(f, lo, hi)
        a_lo, _, _ = regression_alpha(f, lo, mid)
        a_hi, _, _ = regression_alpha(f, mid, hi)
    except UnsupportedFunctional:
        raise
    if abs(a_lo - a_hi) > DRIFT_TOL:
        raise NoPowerTail(f"fitted index drifts from {a_lo:.4f} to {a_hi:.4f}")
    if not 0 < a_all < 2:
        raise NoPowerTail(f"fitted index {a_all:.4f} outside (0, 2)")
    x = 10.0**hi
    pp, pm = tail_probabilities(f, x)
    beta = (pp - pm) / (pp + pm)
    diag = {"method": "regression", "r2": r2, "alpha_low": a_lo, "alpha_high": a_hi}
    return TailModel(a_all, beta, SlowlyVaryingSpec.constant(math.exp(icpt)), x_min=10.0**lo, diagnostics=diag)


def _power_norming(f: FunctionalSpec, n: int) -> float | None:
    """``a`` with ``P(|f| > a) = 1/n`` in closed form when ``f`` allows it."""
    if isinstance(f, (PowerAbs, SignedPower)) and f.r < 0:
        # |f| > a  <=>  |X| < a**(1/r)  (plus a lower branch when centered)
        y = _SQRT2 * special.erfinv(1.0 / n)
        shift = f.shift if isinstance(f, PowerAbs) else 0.0
        a = y**f.r - shift
        if a >= shift:  # the branch |X|**r < shift - a is empty
            return float(a)
    return None


_SQRT2 = math.sqrt(2.0)


def _bisect_norming(f: FunctionalSpec, n: int) -> float:
    target = 1.0 / n
    g = lambda a: math.log(prob_abs_greater(f, a)) - math.log(target)
    lo, hi = 1e-300, 1.0
    while g(hi) > 0:
        lo, hi = hi, hi * 16
        if hi > 1e300:
            raise NoPowerTail("could not bracket the norming constant")
    if g(lo) < 0:
        lo = hi / 16
        while g(lo) < 0:
            lo /= 16
    return float(optimize.brentq(g, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=500))


class NormingSequence:
    """``n -> a_n`` with ``P(|f(X)| > a_n) = 1/n``, cached.

    Values are pure functions of ``n`` so concurrent callers always read the
    same number; the lock only guards the dictionary.
    """

    def __init__(self, f: FunctionalSpec, check_tail: bool = True):
        if check_tail:
            fit_tail_model(f)
        self.f = f
        self.mode = "Analytic" if _power_norming(f, 2**20) is not None else "NumericInversion"
        self._cache: dict[int, float] = {}
        self._lock = threading.Lock()

    def __call__(self, n: int) -> float:
        n = int(n)
        if n < 2:
            raise NTooSmall(f"n = {n} < 2")
        hit = self._cache.get(n)
        if hit is not None:
            return hit
        a = _power_norming(self.f, n)
        if a is None:
            a = _bisect_norming(self.f, n)
        with self._lock:
            self._cache.setdefault(n, a)
        return a

    def cached(self) -> list[tuple[int, float]]:
        with self._lock:
            return sorted(self._cache.items())


def norming_constant(f: FunctionalSpec, n: int) -> float:
    if int(n) < 2:
        raise NTooSmall(f"n = {n} < 2")
    return NormingSequence(f)(n)


def _pieces(f: FunctionalSpec, u: float):
    """Preimage of ``{|f| < u}`` split into pieces on one side of zero."""
    out = []
    for a, b in f.preimage(-u, u):
        if a < 0 < b:
            out += [(a, 0.0), (0.0, b)]
        else:
            out.append((a, b))
    return out


_X_MAX = 40.0  # phi(40) ~ 1e-348; nothing beyond contributes


def _phi(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def _integrate_side(g, a: float, b: float) -> float:
    """``int_a^b g(x) phi(x) dx`` for ``0 <= a < b``; log variable below 1."""
    b = min(b, _X_MAX)
    if b <= a:
        return 0.0
    total = 0.0
    if a < 1:
        top = min(b, 1.0)
        lo = -np.inf if a == 0 else math.log(a)
        h = lambda s: g(math.exp(s)) * _phi(math.exp(s)) * math.exp(s)
        total += integrate.quad(h, lo, math.log(top), limit=200, epsabs=0, epsrel=1e-12)[0]
    if b > 1:
        start = max(a, 1.0)
        total += integrate.quad(lambda x: g(x) * _phi(x), start, b, limit=200, epsabs=0, epsrel=1e-12)[0]
    return total


def _truncated(f: FunctionalSpec, u: float, power: int) -> float:
    total = 0.0
    for a, b in _pieces(f, u):
        if b <= 0:
            total += _integrate_side(lambda x: float(f(-x)) ** power, -b, -a)
        else:
            total += _integrate_side(lambda x: float(f(x)) ** power, a, b)
    return total


def truncated_second_moment(f: FunctionalSpec, u: float) -> float:
    """``E[f(X)**2 1(|f(X)| < u)]``."""
    if not u > 0:
        raise ValueError("u must be positive")
    if math.isinf(u) and isinstance(f, HermiteFn):
        return float(math.factorial(f.k)) if f.k else 1.0
    return _truncated(f, u, 2)


def truncated_mean(f: FunctionalSpec, u: float) -> float:
    """``E[f(X) 1(|f(X)| <= u)]``, the per-term centering for index one."""
    if not u > 0:
        raise ValueError("u must be positive")
    return _truncated(f, u, 1)


def karamata_ratio(f: FunctionalSpec, u: float) -> float:
    """``E[f**2 1(|f| < u)] / (u**2 P(|f| > u))``, tending to ``alpha/(2-alpha)``."""
    return truncated_second_moment(f, u) / (u * u * prob_abs_greater(f, u))


def karamata_limit(alpha: float) -> float:
    return alpha / (2 - alpha)


__all__ = [
    "NormingSequence",
    "TailModel",
    "fit_tail_model",
    "karamata_limit",
    "karamata_ratio",
    "norming_constant",
    "prob_abs_greater",
    "regression_alpha",
    "tail_probabilities",
    "truncated_mean",
    "truncated_second_moment",
]
