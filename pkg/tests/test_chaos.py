import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from lrdlab.chaos import (ChaosDecomposition, chaos_coefficients, chaos_variance_oracle, functional_variance,
                          gauss_hermite, hermite_eval, hermite_rank, hermite_sum_weights, hermite_table,
                          rank_or_none, rank_projection_variance)
from lrdlab.errors import InfiniteVariance, NonIntegrable, OrderTooLarge, RankUndefined
from lrdlab.functionals import AffineOf, HermiteFn, PowerAbs, SignedPower, abs_moment
from lrdlab.lrd import LrdConfig, build_coefficients, fgn_autocovariance, stationary_autocovariance
from lrdlab.rng import stream

SQ2PI = math.sqrt(2 * math.pi)


def test_hermite_values():
    assert hermite_eval(2, 2.0) == 3
    assert hermite_eval(3, 2.0) == 2
    assert hermite_eval(4, 0.0) == 3
    assert hermite_eval(0, 5.0) == 1
    with pytest.raises(OrderTooLarge):
        hermite_eval(171, 0.1)


@given(x=st.floats(-6, 6), k=st.integers(0, 20))
def test_table_matches_eval(x, k):
    assert hermite_table(20, x)[k] == pytest.approx(hermite_eval(k, x), rel=1e-12, abs=1e-9)


@given(x=st.floats(-5, 5), k=st.integers(1, 15))
def test_hermite_derivative_identity(x, k):
    # h_k' = k h_{k-1}
    eps = 1e-6
    d = (hermite_eval(k, x + eps) - hermite_eval(k, x - eps)) / (2 * eps)
    assert d == pytest.approx(k * hermite_eval(k - 1, x), rel=1e-5, abs=1e-4 * math.factorial(k) ** 0.5)


def test_orthogonality():
    x, w = gauss_hermite(401)
    tab = hermite_table(12, x)
    gram = (tab * w) @ tab.T
    norm = np.sqrt([math.factorial(k) for k in range(13)])
    # E[h_j h_k] / sqrt(j! k!) = delta_jk
    assert np.max(np.abs(gram / np.outer(norm, norm) - np.eye(13))) < 1e-9


def test_square_is_h2_plus_one():
    d = chaos_coefficients(PowerAbs(2.0))
    assert d.coeffs[0] == pytest.approx(1, abs=1e-12)
    assert d.coeffs[2] == pytest.approx(1, abs=1e-12)
    assert np.max(np.abs(np.delete(d.coeffs, [0, 2]))) < 1e-10
    assert d.rank == 2


def test_abs_closed_form():
    d = chaos_coefficients(PowerAbs(1.0))
    e1 = math.sqrt(2 / math.pi)
    e3 = 2 * e1  # E|X|^3
    assert d.coeffs[0] == pytest.approx(e1, abs=1e-12)
    assert d.coeffs[2] == pytest.approx((e3 - e1) / 2, abs=1e-12)
    assert d.coeffs[2] == pytest.approx(0.39894, abs=5e-6)


def test_h3_pure():
    d = chaos_coefficients(HermiteFn(3))
    assert d.coeffs[3] == pytest.approx(1, abs=1e-10)
    assert np.max(np.abs(np.delete(d.coeffs, 3))) < 1e-10


def test_ranks():
    assert hermite_rank(chaos_coefficients(HermiteFn(2))) == 2
    assert hermite_rank(chaos_coefficients(HermiteFn(1))) == 1
    assert hermite_rank(chaos_coefficients(PowerAbs(-0.7, centered=True))) == 2
    assert hermite_rank(chaos_coefficients(SignedPower(-0.7))) == 1
    with pytest.raises(RankUndefined):
        hermite_rank(chaos_coefficients(HermiteFn(0)))
    with pytest.raises(NonIntegrable):
        chaos_coefficients(PowerAbs(-1.0))
    assert rank_or_none(PowerAbs(-1.2)) is None


def test_power_coefficients_closed_form():
    # E[|X|^r h_2(X)] = E|X|^{r+2} - E|X|^r
    for r in (-0.7, -0.3, 0.5, 1.5):
        d = chaos_coefficients(PowerAbs(r))
        assert d.coeffs[2] == pytest.approx((abs_moment(r + 2) - abs_moment(r)) / 2, rel=1e-10)


@pytest.mark.parametrize("f", [PowerAbs(2.0), HermiteFn(3)])
def test_parseval(f):
    d = chaos_coefficients(f, K=40)
    energy = float(np.sum(d.coeffs[1:] ** 2 * [math.factorial(j) for j in range(1, 41)]))
    phi = lambda x: math.exp(-x * x / 2) / SQ2PI
    m1 = integrate.quad(lambda x: 2 * float(f(x)) * phi(x), 0, math.inf)[0] if f.parity == "even" else 0.0
    m2 = 2 * integrate.quad(lambda x: float(f(x)) ** 2 * phi(x), 0, math.inf, epsabs=1e-14)[0]
    assert energy == pytest.approx(m2 - m1**2, rel=1e-6)
    assert functional_variance(f) == pytest.approx(m2 - m1**2, rel=1e-10)


def _abs_energy(m):
    # Gaussian integration by parts: E[|X| h_n(X)] = 2 phi(0) h_{n-2}(0), so for n = 2m
    # f_n^2 n! = 4 phi(0)^2 ((2m-3)!!)^2 / (2m)!
    m = np.asarray(m, dtype=float)
    lg_dfact = special.gammaln(2 * m - 1) - (m - 1) * math.log(2) - special.gammaln(m)
    return 4 / (2 * math.pi) * np.exp(2 * lg_dfact - special.gammaln(2 * m + 1))


def test_parseval_abs():
    # |x| has a kink, so its chaos energy decays like K^(-3/2); the tail beyond K is
    # summed from the closed-form coefficients rather than truncated
    K = 160
    d = chaos_coefficients(PowerAbs(1.0), K=K)
    ms = np.arange(1, K // 2 + 1)
    closed = np.array([2 / SQ2PI * (-1) ** (m - 1) * math.exp(special.gammaln(2 * m - 1) - (m - 1) * math.log(2)
                                                             - special.gammaln(m) - special.gammaln(2 * m + 1))
                       for m in ms])
    assert np.allclose(d.coeffs[2::2], closed, rtol=1e-9, atol=1e-15)
    head = float(np.sum(d.coeffs[1:] ** 2 * special.factorial(np.arange(1, K + 1))))
    tail_m = np.arange(K // 2 + 1, 10**7)
    tail = float(np.sum(_abs_energy(tail_m)))
    # remaining mass beyond 10^7 terms: summand ~ c m^(-5/2), integral bound
    c = _abs_energy(10**7) * 1e7**2.5
    tail += c * (2 / 3) * 1e7**-1.5
    assert head + tail == pytest.approx(1 - 2 / math.pi, rel=1e-6)


@given(r=st.floats(-0.95, 3.0).filter(lambda r: abs(r) > 1e-3), centered=st.booleans(), a=st.floats(-3, 3).filter(lambda a: abs(a) > 1e-3))
def test_parity_exact(r, centered, a):
    d = chaos_coefficients(AffineOf(PowerAbs(r, centered), a, 0.5))
    assert np.all(d.coeffs[1::2] == 0.0)
    s = chaos_coefficients(SignedPower(r))
    assert np.all(s.coeffs[0::2] == 0.0)


@pytest.mark.slow
@pytest.mark.parametrize("f", [PowerAbs(-0.7, centered=True), SignedPower(-0.7), PowerAbs(1.0), PowerAbs(0.5)])
def test_monte_carlo_consistency(f):
    d = chaos_coefficients(f)
    rng = stream(31337, "chaos-mc")
    K, chunks, size = 4, 10, 10**6
    s1 = np.zeros(K + 1)
    s2 = np.zeros(K + 1)
    for _ in range(chunks):
        x = rng.standard_normal(size)
        g = hermite_table(K, x) * f(x)
        s1 += g.sum(axis=1)
        s2 += (g * g).sum(axis=1)
    N = chunks * size
    mean = s1 / N
    se = np.sqrt((s2 / N - mean**2) / N)
    fact = np.array([math.factorial(k) for k in range(K + 1)])
    for k in range(K + 1):
        if d.coeffs[k] == 0.0 and se[k] == 0:
            continue
        assert abs(mean[k] / fact[k] - d.coeffs[k]) <= 4 * se[k] / fact[k] + 1e-12


def test_json_shape():
    d = chaos_coefficients(PowerAbs(-0.7, True))
    j = d.to_dict()
    assert set(j) == {"family", "params", "coeffs", "rank", "tolerance", "nodes"}
    assert j["params"] == {"r": -0.7, "centered": True}
    assert isinstance(d, ChaosDecomposition)


def test_variance_oracle_trivial():
    d = chaos_coefficients(HermiteFn(1))
    c = build_coefficients(LrdConfig(0.8, M=64))
    assert chaos_variance_oracle(d, c, 1).value == pytest.approx(1.0)


def test_variance_oracle_brute_force():
    # compare with the full covariance matrix for a short sequence
    c = build_coefficients(LrdConfig(0.75, M=256))
    from lrdlab.lrd import autocovariances

    rho = autocovariances(c, 40)
    f = PowerAbs(1.0)
    d = chaos_coefficients(f, K=60)
    n = 40
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    R = rho[idx]
    fact = np.array([math.factorial(k) for k in range(61)], dtype=float)
    cov = sum(d.coeffs[k] ** 2 * fact[k] * R**k for k in range(1, 61))
    o = chaos_variance_oracle(d, c, n)
    assert o.value == pytest.approx(cov.sum(), rel=1e-8)
    # the K=60 truncation of |x| leaves a little energy, bounded rigorously
    assert abs(o.value - cov.sum()) <= o.error_bound
    assert o.error_bound < 1e-3 * o.value


def test_infinite_variance():
    d = chaos_coefficients(PowerAbs(-0.7, True))
    with pytest.raises(InfiniteVariance):
        chaos_variance_oracle(d, np.ones(10), 10)


def test_h2_variance_slope():
    ns = 2 ** np.arange(8, 14)
    acov = stationary_autocovariance(LrdConfig(0.9), 2**13)
    d = chaos_coefficients(HermiteFn(2))
    v = [chaos_variance_oracle(d, acov, int(n)).value for n in ns]
    assert abs(np.polyfit(np.log(ns), np.log(v), 1)[0] - 1.6) < 0.05


def test_h1_variance_slope():
    ns = 2 ** np.arange(8, 14)
    d = chaos_coefficients(HermiteFn(1))
    v = [chaos_variance_oracle(d, fgn_autocovariance(0.6, 2**13), int(n)).value for n in ns]
    assert abs(np.polyfit(np.log(ns), np.log(v), 1)[0] - 1.2) < 0.05
    # the moving-average model shares the exponent only asymptotically: the local slope
    # falls toward 2H as n grows
    acov = stationary_autocovariance(LrdConfig(0.6), 2**20)
    slopes = []
    for lo in (8, 16):
        ns = 2 ** np.arange(lo, lo + 5)
        v = [chaos_variance_oracle(d, acov, int(n)).value for n in ns]
        slopes.append(np.polyfit(np.log(ns), np.log(v), 1)[0])
    assert slopes[0] > slopes[1] > 1.2


def test_sum_weights_iid():
    rho = np.zeros(50)
    rho[0] = 1
    S = hermite_sum_weights(rho, 50, 3)
    assert np.allclose(S[1:], 50) and S[0] == 2500
    assert rank_projection_variance(2.0, 2, rho, 50) == pytest.approx(4 * 2 * 50)
