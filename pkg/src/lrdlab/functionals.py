"""Functionals ``f`` applied to a standard normal variable.

Each family knows how to evaluate itself, how to invert itself on its monotone
pieces (``preimage``), and therefore how to compute exact probabilities
``P(lo < f(X) < hi)`` without sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.polynomial import hermite_e as He
from scipy import special

from .errors import InvalidParameter, NonIntegrable, UnsupportedFunctional

_SQRT2 = math.sqrt(2.0)


def abs_moment(p: float) -> float:
    """``E|X|**p`` for standard normal ``X``; infinite for ``p <= -1``."""
    if p <= -1:
        return math.inf
    return 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def normal_mass(lo: float, hi: float) -> float:
    """``P(lo < X < hi)`` to full relative precision, tails and narrow intervals included."""
    if hi <= lo:
        return 0.0
    if hi <= 0 or -lo > hi:
        # mirror so that results are exactly symmetric
        return normal_mass(-hi, -lo)
    w = hi - lo
    if w * max(1.0, abs(lo), abs(hi)) < 1.0:
        # the density barely changes across the interval; a CDF difference would cancel
        x = lo + 0.5 * w * (_GL_X + 1.0)
        return float(0.5 * w * (_GL_W @ np.exp(-0.5 * x * x)) / math.sqrt(2 * math.pi))
    if lo >= 0:
        if lo > 1.0:
            return float(special.ndtr(-lo) - special.ndtr(-hi))
        return float(0.5 * (special.erf(hi / _SQRT2) - special.erf(lo / _SQRT2)))
    return float(0.5 * (special.erf(hi / _SQRT2) + special.erf(-lo / _SQRT2)))


def _pos_branch(r: float, lo: float, hi: float) -> list[tuple[float, float]]:
    """``{y > 0 : lo < y**r < hi}`` as a list of intervals."""
    lo = max(lo, 0.0)
    if hi <= lo:
        return []
    if r < 0:
        a = 0.0 if math.isinf(hi) else hi ** (1 / r)
        b = math.inf if lo == 0 else lo ** (1 / r)
    else:
        a = 0.0 if lo == 0 else lo ** (1 / r)
        b = math.inf if math.isinf(hi) else hi ** (1 / r)
    return [(a, b)] if b > a else []


def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


class _Base:
    def preimage(self, lo: float, hi: float) -> list[tuple[float, float]]:
        raise UnsupportedFunctional(f"{type(self).__name__} has no monotone decomposition")

    def prob_between(self, lo: float, hi: float) -> float:
        return math.fsum(normal_mass(a, b) for a, b in self.preimage(lo, hi))

    def prob_greater(self, y: float) -> float:
        return self.prob_between(y, math.inf)

    def prob_less(self, y: float) -> float:
        return self.prob_between(-math.inf, y)

    @property
    def parity(self) -> str:
        """Parity of the chaos coefficients of order >= 1."""
        return self.symmetry


@dataclass(frozen=True)
class PowerAbs(_Base):
    """``|x|**r``, optionally minus ``E|X|**r``."""

    r: float
    centered: bool = False

    def __post_init__(self):
        if self.r == 0:
            raise InvalidParameter("PowerAbs requires r != 0")
        if self.centered and self.r <= -1:
            raise NonIntegrable(f"E|X|^{self.r} is infinite; cannot center")

    symmetry = "even"

    @property
    def monotonicity(self) -> str:
        return "decreasing" if self.r < 0 else "increasing"

    @property
    def shift(self) -> float:
        return abs_moment(self.r) if self.centered else 0.0

    def __call__(self, x):
        with np.errstate(divide="ignore"):
            return np.abs(x) ** self.r - self.shift

    def mean(self) -> float:
        return 0.0 if self.centered else abs_moment(self.r)

    def preimage(self, lo, hi):
        m = self.shift
        pos = _pos_branch(self.r, lo + m, hi + m)
        return _merge(pos + [(-b, -a) for a, b in pos])

    def to_dict(self):
        return {"family": "PowerAbs", "r": self.r, "centered": self.centered}


@dataclass(frozen=True)
class SignedPower(_Base):
    """``sign(x) |x|**r``."""

    r: float

    def __post_init__(self):
        if self.r == 0:
            raise InvalidParameter("SignedPower requires r != 0")

    symmetry = "odd"

    @property
    def monotonicity(self) -> str:
        return "decreasing" if self.r < 0 else "increasing"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.sign(x) * np.abs(x) ** self.r

    def mean(self) -> float:
        if self.r <= -1:
            return math.nan
        return 0.0

    def preimage(self, lo, hi):
        pos = _pos_branch(self.r, lo, hi)
        neg = _pos_branch(self.r, -hi, -lo)
        return _merge(pos + [(-b, -a) for a, b in neg])

    def to_dict(self):
        return {"family": "SignedPower", "r": self.r}


@dataclass(frozen=True)
class HermiteFn(_Base):
    """Probabilists' Hermite polynomial ``h_k``."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise InvalidParameter("HermiteFn requires k >= 0")

    @property
    def symmetry(self) -> str:
        return "even" if self.k % 2 == 0 else "odd"

    @property
    def monotonicity(self) -> str:
        return "increasing" if self.k == 1 else ("constant" if self.k == 0 else "none")

    def _coef(self):
        c = np.zeros(self.k + 1)
        c[-1] = 1.0
        return c

    def __call__(self, x):
        return He.hermeval(np.asarray(x, dtype=float), self._coef())

    def mean(self) -> float:
        return 1.0 if self.k == 0 else 0.0

    def preimage(self, lo, hi):
        if self.k == 0:
            return [(-math.inf, math.inf)] if lo < 1 < hi else []
        cuts = []
        for level in (lo, hi):
            if math.isinf(level):
                continue
            c = self._coef()
            c[0] -= level
            roots = He.hermeroots(c)
            cuts.extend(float(z.real) for z in roots if abs(z.imag) < 1e-9)
        cuts = sorted(set(cuts))
        edges = [-math.inf] + cuts + [math.inf]
        out = []
        for a, b in zip(edges[:-1], edges[1:]):
            if math.isinf(a) and math.isinf(b):
                mid = 0.0
            elif math.isinf(a):
                mid = b - 1.0
            elif math.isinf(b):
                mid = a + 1.0
            else:
                mid = 0.5 * (a + b)
            v = float(self(mid))
            if lo < v < hi:
                out.append((a, b))
        return _merge(out)

    def to_dict(self):
        return {"family": "HermiteFn", "k": self.k}


@dataclass(frozen=True)
class AffineOf(_Base):
    """``a * inner(x) + b``."""

    inner: "FunctionalSpec"
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.a == 0:
            raise InvalidParameter("AffineOf requires a != 0")

    @property
    def symmetry(self) -> str:
        s = self.inner.symmetry
        if s == "odd" and self.b != 0:
            return "none"
        return s

    @property
    def parity(self) -> str:
        return self.inner.parity

    @property
    def monotonicity(self) -> str:
        m = self.inner.monotonicity
        if self.a > 0 or m not in ("increasing", "decreasing"):
            return m
        return "decreasing" if m == "increasing" else "increasing"

    @property
    def r(self):
        return getattr(self.inner, "r", None)

    def __call__(self, x):
        return self.a * self.inner(x) + self.b

    def mean(self) -> float:
        return self.a * self.inner.mean() + self.b

    def preimage(self, lo, hi):
        u, v = (lo - self.b) / self.a, (hi - self.b) / self.a
        return self.inner.preimage(min(u, v), max(u, v))

    def to_dict(self):
        return {"family": "AffineOf", "inner": self.inner.to_dict(), "a": self.a, "b": self.b}


FunctionalSpec = Union[PowerAbs, SignedPower, HermiteFn, AffineOf]

_FAMILIES = {
    "PowerAbs": (PowerAbs, {"r", "centered"}),
    "SignedPower": (SignedPower, {"r"}),
    "HermiteFn": (HermiteFn, {"k"}),
}


def functional_from_dict(d: dict) -> FunctionalSpec:
    fam = d.get("family")
    if fam == "AffineOf":
        unknown = set(d) - {"family", "inner", "a", "b"}
        if unknown:
            raise InvalidParameter(f"unknown AffineOf keys: {sorted(unknown)}")
        return AffineOf(functional_from_dict(d["inner"]), float(d.get("a", 1.0)), float(d.get("b", 0.0)))
    if fam not in _FAMILIES:
        raise InvalidParameter(f"unknown functional family {fam!r}")
    cls, keys = _FAMILIES[fam]
    unknown = set(d) - keys - {"family"}
    if unknown:
        raise InvalidParameter(f"unknown {fam} keys: {sorted(unknown)}")
    kwargs = {k: d[k] for k in keys if k in d}
    return cls(**kwargs)


def base_power(f: FunctionalSpec):
    """Unwrap affine layers: ``(inner power family, scale a, shift b)`` or None."""
    a, b = 1.0, 0.0
    while isinstance(f, AffineOf):
        a, b = a * f.a, a * f.b + b
        f = f.inner
    if isinstance(f, (PowerAbs, SignedPower)):
        return f, a, b
    return None
