"""Exceedance point patterns, their Poisson limit, and the extremal index."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import DegenerateRectangle, InvalidParameter, TooFewExceedances
from ..tails import TailModel
from .config import load_thresholds
from .stats import VerificationReport


@dataclass(frozen=True, eq=False)
class PointPattern:
    values: np.ndarray  # f(X_i)/a_n
    times: np.ndarray  # i/n
    c: float
    n: int

    def __len__(self) -> int:
        return len(self.values)

    def count(self, rect: "Rectangle") -> int:
        v, u = self.values, self.times
        return int(np.sum((v > rect.v_lo) & (v <= rect.v_hi) & (u > rect.s) & (u <= rect.t)))


def exceedance_pattern(values, a_n: float, c: float) -> PointPattern:
    if not c > 0:
        raise InvalidParameter("c must be positive")
    v = np.asarray(values, dtype=float)
    idx = np.nonzero(np.abs(v) >= c * a_n)[0]
    return PointPattern(v[idx] / a_n, (idx + 1) / len(v), c, len(v))


@dataclass(frozen=True)
class Rectangle:
    """Value interval ``(v_lo, v_hi]`` times time interval ``(s, t]``."""

    v_lo: float
    v_hi: float
    s: float = 0.0
    t: float = 1.0

    def check(self, c: float) -> None:
        if not self.v_lo < self.v_hi or not 0 <= self.s < self.t <= 1:
            raise DegenerateRectangle(f"{self} is empty or outside (0, 1]")
        if self.v_lo < c and self.v_hi > -c:
            raise DegenerateRectangle(f"{self} meets the excluded band (-{c}, {c})")

    def mass(self, alpha: float, beta: float) -> float:
        """Limit intensity ``(t-s) int alpha ((1 +- beta)/2) |v|^(-alpha-1) dv``."""
        tail = lambda x: 0.0 if math.isinf(x) else abs(x) ** -alpha
        if self.v_lo >= 0:
            w = (1 + beta) / 2 * (tail(self.v_lo) - tail(self.v_hi))
        else:
            w = (1 - beta) / 2 * (tail(self.v_hi) - tail(self.v_lo))
        return (self.t - self.s) * w

    def disjoint(self, other: "Rectangle") -> bool:
        return self.v_hi <= other.v_lo or other.v_hi <= self.v_lo or self.t <= other.s or other.t <= self.s

    def label(self) -> str:
        return f"({self.v_lo:g},{self.v_hi:g}]x({self.s:g},{self.t:g}]"


def poisson_intensity_test(patterns, tail: TailModel, rectangles, thresholds: dict | None = None,
                           independence=None) -> VerificationReport:
    """Mean counts vs limit intensity, dispersion, and independence across disjoint rectangles.

    ``independence`` lists rectangle pairs whose counts are checked for rank
    correlation; by default every disjoint pair among ``rectangles``.
    """
    th = thresholds or load_thresholds()
    patterns = list(patterns)
    if not patterns:
        raise InvalidParameter("no patterns")
    c = patterns[0].c
    rects = [r if isinstance(r, Rectangle) else Rectangle(*r) for r in rectangles]
    for r in rects:
        r.check(c)
    counts = np.array([[p.count(r) for r in rects] for p in patterns], dtype=float)
    per = []
    ok = True
    worst = 0.0
    lo_d, hi_d = th["dispersion"]
    for j, r in enumerate(rects):
        mass = r.mass(tail.alpha, tail.beta)
        mean = float(counts[:, j].mean())
        if mass == 0:
            rel, disp, good = (0.0 if mean == 0 else math.inf), math.nan, mean == 0
        else:
            rel = abs(mean - mass) / mass
            var = float(counts[:, j].var(ddof=1))
            disp = var / mean if mean > 0 else math.nan
            good = rel <= th["intensity_rtol"] and lo_d <= disp <= hi_d
        worst = max(worst, rel)
        ok = ok and good
        per.append({"rectangle": r.label(), "mass": mass, "mean": mean, "rel_err": rel, "dispersion": disp, "passed": good})
    if independence is None:
        pairs = [(rects[i], rects[j]) for i, j in itertools.combinations(range(len(rects)), 2)
                 if rects[i].disjoint(rects[j])]
    else:
        pairs = [tuple(r if isinstance(r, Rectangle) else Rectangle(*r) for r in pr) for pr in independence]
    corr = []
    for ri, rj in pairs:
        ri.check(c)
        rj.check(c)
        if not ri.disjoint(rj):
            raise DegenerateRectangle(f"{ri.label()} and {rj.label()} overlap")
        a = np.array([p.count(ri) for p in patterns], dtype=float)
        b = np.array([p.count(rj) for p in patterns], dtype=float)
        rho = 0.0 if a.std() == 0 or b.std() == 0 else float(stats.spearmanr(a, b)[0])
        good = abs(rho) < th["max_abs_corr"]
        ok = ok and good
        corr.append({"pair": [ri.label(), rj.label()], "spearman": rho, "passed": good})
    return VerificationReport("poisson_intensity", worst, None, th["intensity_rtol"], bool(ok),
                              {"replicas": len(patterns), "rectangles": len(rects)},
                              {"rectangles": per, "correlations": corr})


def max_level_curve(maxima, a_n: float, u: float, tail: TailModel) -> tuple[float, float]:
    """Empirical ``P(max f(X_i) <= u a_n)`` and its limit ``exp(-(1+beta)/2 u^-alpha)``."""
    emp = float(np.mean(np.asarray(maxima) <= u * a_n))
    return emp, math.exp(-(1 + tail.beta) / 2 * u ** -tail.alpha)


def extremal_index_estimate(values, b: int | None = None, threshold: float | None = None,
                            per_block: float = 0.25, min_exceedances: int = 50) -> float:
    """Blocks estimator of the extremal index.

    ``values`` is one series or a ``(replicas, n)`` array pooled across rows.
    With ``K`` blocks containing an exceedance out of ``k`` and ``N``
    exceedances out of ``n`` points, the estimate is
    ``log(1 - K/k) / (b log(1 - N/n))``, which reduces to ``K/N`` when
    exceedances are rare and removes the bias of that ratio otherwise.
    The default threshold leaves about ``per_block`` exceedances per block.
    """
    v = np.atleast_2d(np.asarray(values, dtype=float))
    n = v.shape[1]
    b = int(math.ceil(math.sqrt(n))) if b is None else int(b)
    if b < 2:
        raise InvalidParameter("block length must be >= 2")
    nb = n // b
    if nb < 2:
        raise InvalidParameter("fewer than two blocks")
    used = v[:, : nb * b]
    if threshold is None:
        threshold = float(np.quantile(used, 1 - per_block / b))
    exc = used > threshold
    N = int(exc.sum())
    if N < min_exceedances:
        raise TooFewExceedances(f"{N} exceedances (< {min_exceedances})")
    K = int(exc.reshape(v.shape[0], nb, b).any(axis=2).sum())
    k_tot, n_tot = v.shape[0] * nb, used.size
    if K >= k_tot:
        return float("nan")
    return math.log1p(-K / k_tot) / (b * math.log1p(-N / n_tot))


def moving_maximum(m: int, rng: np.random.Generator, alpha: float = 1.0) -> np.ndarray:
    """``Y_i = max(Z_i, Z_{i-1})`` with iid Frechet ``Z``; extremal index 1/2."""
    z = rng.standard_exponential(m + 1) ** (-1 / alpha)
    return np.maximum(z[1:], z[:-1])


__all__ = [
    "PointPattern",
    "Rectangle",
    "exceedance_pattern",
    "extremal_index_estimate",
    "max_level_curve",
    "moving_maximum",
    "poisson_intensity_test",
]
