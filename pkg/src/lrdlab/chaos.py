"""Hermite chaos of a functional of a standard normal variable."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import InfiniteVariance, NonIntegrable, OrderTooLarge, RankUndefined
from .functionals import AffineOf, FunctionalSpec, HermiteFn, PowerAbs, SignedPower, abs_moment, base_power
from .lrd import CoefficientSeq, autocovariances

MAX_ORDER = 170
DEFAULT_K = 16
DEFAULT_NODES = 401
RANK_RTOL = 1e-7


def hermite_eval(k: int, x):
    """Probabilists' Hermite polynomial ``h_k(x)`` by the three-term recurrence."""
    if k > MAX_ORDER:
        raise OrderTooLarge(f"order {k} exceeds {MAX_ORDER}")
    if k < 0:
        raise ValueError("order must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if k == 0:
        return prev if prev.ndim else float(prev)
    for j in range(1, k):
        prev, cur = cur, x * cur - j * prev
    return cur if cur.ndim else float(cur)


def hermite_table(K: int, x) -> np.ndarray:
    """Rows ``h_0(x) .. h_K(x)``."""
    if K > MAX_ORDER:
        raise OrderTooLarge(f"order {K} exceeds {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    out = np.empty((K + 1,) + x.shape)
    out[0] = 1.0
    if K >= 1:
        out[1] = x
    for j in range(1, K):
        out[j + 1] = x * out[j] - j * out[j - 1]
    return out


def gauss_hermite(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``E g(X)``, X standard normal."""
    x, w = special.roots_hermitenorm(nodes)
    return x, w / math.sqrt(2 * math.pi)


@dataclass(frozen=True, eq=False)
class ChaosDecomposition:
    coeffs: np.ndarray
    K: int
    rank: int | None
    quad_nodes: int
    tolerance: float
    functional: FunctionalSpec

    @property
    def norms(self) -> np.ndarray:
        """``|f_k| sqrt(k!)``, the L2 size of each chaos component."""
        k = np.arange(self.K + 1)
        return np.abs(self.coeffs) * np.sqrt(special.factorial(k))

    def to_dict(self) -> dict:
        d = self.functional.to_dict()
        fam = d.pop("family")
        return {
            "family": fam,
            "params": d,
            "coeffs": [float(c) for c in self.coeffs],
            "rank": self.rank,
            "tolerance": self.tolerance,
            "nodes": self.quad_nodes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _power_moments(p: PowerAbs | SignedPower, K: int, nodes: int) -> tuple[np.ndarray, int]:
    """``E[g(X) h_k(X)]`` for ``g = |x|^r`` or ``sign(x)|x|^r``.

    Fold onto ``x > 0`` and substitute ``t = x^2/2``; the ``x^r`` singularity
    becomes a generalised Laguerre weight ``t^((r-1)/2) e^{-t}`` and the rest
    is a polynomial in ``t``, so the rule is exact once it has enough nodes.
    """
    r = p.r
    n = min(nodes, max(K // 2 + 2, 64))
    out = np.zeros(K + 1)
    pref = 2.0 / math.sqrt(2 * math.pi) * 2 ** ((r - 1) / 2)
    want_even = p.symmetry == "even"
    t, w = special.roots_genlaguerre(n, (r - 1) / 2)
    s = np.sqrt(2 * t)
    tab = hermite_table(K, s)
    if want_even:
        out[0::2] = pref * (tab[0::2] @ w)
    if K >= 1 and not want_even:
        t2, w2 = special.roots_genlaguerre(n, r / 2)
        s2 = np.sqrt(2 * t2)
        tab2 = hermite_table(K, s2)
        out[1::2] = pref * math.sqrt(2) * ((tab2[1::2] / s2) @ w2)
    return out, n


def _raw_moments(f: FunctionalSpec, K: int, nodes: int) -> tuple[np.ndarray, int]:
    if isinstance(f, AffineOf):
        inner, used = _raw_moments(f.inner, K, nodes)
        out = f.a * inner
        out[0] += f.b
        return out, used
    if isinstance(f, (PowerAbs, SignedPower)):
        if f.r <= -1:
            raise NonIntegrable(f"E|f(X)| diverges for r = {f.r} <= -1")
        out, used = _power_moments(f, K, nodes)
        if isinstance(f, PowerAbs) and f.centered:
            out[0] -= f.shift
        return out, used
    if isinstance(f, HermiteFn):
        x, w = gauss_hermite(nodes)
        return hermite_table(K, x) @ (f(x) * w), nodes
    raise NonIntegrable(f"no quadrature rule for {type(f).__name__}")


def _rank(norms: np.ndarray, f0: float) -> tuple[int | None, float]:
    upper = norms[1:]
    if not np.all(np.isfinite(norms)):
        raise FloatingPointError("non-finite chaos coefficients; reduce K or nodes")
    peak = float(upper.max()) if len(upper) else 0.0
    if peak <= 1e-14 * max(1.0, abs(f0)):
        return None, RANK_RTOL
    hits = np.nonzero(upper > RANK_RTOL * peak)[0]
    return int(hits[0]) + 1, RANK_RTOL * peak


def chaos_coefficients(f: FunctionalSpec, K: int = DEFAULT_K, nodes: int = DEFAULT_NODES) -> ChaosDecomposition:
    """``f_k = E[f(X) h_k(X)] / k!`` for ``k = 0..K``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > MAX_ORDER:
        raise OrderTooLarge(f"K = {K} exceeds {MAX_ORDER}")
    moments, used = _raw_moments(f, K, nodes)
    coeffs = moments / special.factorial(np.arange(K + 1))
    parity = f.parity
    if parity == "even":
        coeffs[1::2] = 0.0
    elif parity == "odd":
        coeffs[2::2] = 0.0
    norms = np.abs(coeffs) * np.sqrt(special.factorial(np.arange(K + 1)))
    rank, tol = _rank(norms, coeffs[0])
    coeffs.setflags(write=False)
    return ChaosDecomposition(coeffs, K, rank, used, tol, f)


def hermite_rank(dec: ChaosDecomposition) -> int:
    if dec.rank is None:
        raise RankUndefined("all chaos coefficients of order 1..K vanish")
    return dec.rank


def rank_or_none(f: FunctionalSpec) -> int | None:
    """Hermite rank, or None where the coefficients are undefined."""
    try:
        return chaos_coefficients(f).rank
    except NonIntegrable:
        return None


def functional_variance(f: FunctionalSpec) -> float:
    """``Var f(X)``; ``inf`` when the second moment diverges."""
    if isinstance(f, AffineOf):
        return f.a**2 * functional_variance(f.inner)
    if isinstance(f, PowerAbs):
        return abs_moment(2 * f.r) - abs_moment(f.r) ** 2
    if isinstance(f, SignedPower):
        return abs_moment(2 * f.r)
    if isinstance(f, HermiteFn):
        return float(math.factorial(f.k)) if f.k else 0.0
    raise InfiniteVariance(f"unknown variance for {type(f).__name__}")


class OracleVariance(NamedTuple):
    value: float
    error_bound: float


def hermite_sum_weights(acov: np.ndarray, n: int, K: int) -> np.ndarray:
    """``S_k = sum_{|i-j|<n} (n-|i-j|) rho(i-j)^k`` for ``k = 0..K``."""
    rho = np.asarray(acov[:n], dtype=float)
    lag_w = (n - np.arange(1, n)).astype(float)
    out = np.empty(K + 1)
    pw = np.ones(n - 1)
    for k in range(K + 1):
        out[k] = n * rho[0] ** k + 2.0 * float(lag_w @ pw)
        pw = pw * rho[1:]
    return out


def chaos_variance_oracle(dec: ChaosDecomposition, coeffs, n: int) -> OracleVariance:
    """Exact ``Var(sum_{i<=n} f(X_i))`` through the chaos expansion.

    ``coeffs`` is a ``CoefficientSeq`` or an autocovariance array of length >= n.
    """
    var_f = functional_variance(dec.functional)
    if not math.isfinite(var_f):
        raise InfiniteVariance("f(X) has infinite variance")
    acov = autocovariances(coeffs, n) if isinstance(coeffs, CoefficientSeq) else np.asarray(coeffs)
    if len(acov) < n:
        raise ValueError(f"need {n} autocovariances, got {len(acov)}")
    S = hermite_sum_weights(acov, n, dec.K + 1)
    kk = np.arange(1, dec.K + 1)
    energy = dec.coeffs[1:] ** 2 * special.factorial(kk)
    value = float(energy @ S[1 : dec.K + 1])
    remainder = max(var_f - float(energy.sum()), 0.0)
    cap = S[dec.K + 1] if np.all(acov[:n] >= 0) else float(n) ** 2
    return OracleVariance(value, remainder * cap)


def rank_projection_variance(f_kappa: float, kappa: int, acov: np.ndarray, n: int) -> float:
    """Variance of ``f_kappa * sum h_kappa(X_i)``, finite even when f is heavy tailed."""
    S = hermite_sum_weights(acov, n, kappa)
    return float(f_kappa**2 * math.factorial(kappa) * S[kappa])
