import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrdlab.errors import InvalidParameter, RegimeMismatch
from lrdlab.functionals import HermiteFn, PowerAbs
from lrdlab.lrd import LrdConfig, SlowlyVaryingSpec, effective_l1
from lrdlab.regimes import (FiniteVarianceOutOfScope, HermiteLimit, MixedLimit, ShortMemoryStable, StableLimit,
                            StableParams, alpha1_drift_rate, classify, lambda_limit, normalization_plan, on_boundary,
                            psi_by_parts, psi_closed_form, psi_constant, psi_fourier, regime_for, regime_from_dict,
                            stable_sigma)
from lrdlab.tails import fit_tail_model, norming_constant, truncated_mean

A = 10 / 7


def test_classify_examples():
    assert isinstance(classify(2, 0.9, A), HermiteLimit)
    assert classify(2, 0.9, A).H_ss == pytest.approx(0.8)
    assert isinstance(classify(2, 0.6, A), StableLimit)
    m = classify(2, 0.85, A, lam=2.0)
    assert isinstance(m, MixedLimit) and m.lam == 2.0
    for H in (0.55, 0.7, 0.95):
        r = classify(2, H, 1.0)
        assert isinstance(r, StableLimit) and r.centering == "TruncatedMeanPlusPsi"
    assert isinstance(classify(2, 0.9, 0.5), StableLimit) and classify(2, 0.9, 0.5).centering is None
    assert isinstance(classify(2, 0.4, A), ShortMemoryStable)
    assert isinstance(classify(2, 0.9, 2.0), FiniteVarianceOutOfScope)
    assert isinstance(classify(None, 0.9, A), StableLimit)


def test_boundary_lambda_extremes():
    assert isinstance(classify(2, 0.85, A, lam=0.0), StableLimit)
    assert isinstance(classify(2, 0.85, A, lam=math.inf), HermiteLimit)
    with pytest.raises(InvalidParameter):
        classify(2, 0.85, A)


def test_exact_rational_boundary():
    assert on_boundary(2, Fraction(17, 20), Fraction(10, 7)) == 0
    assert on_boundary(2, Fraction(17, 20) + Fraction(1, 10**30), Fraction(10, 7)) == 1
    # float inputs use the relative tolerance
    assert on_boundary(2, 0.85, 10 / 7) == 0
    assert on_boundary(2, 0.85 + 1e-9, 10 / 7) == 1


def test_invalid_inputs():
    for args in [(2, 1.2, A), (2, 0.0, A), (0, 0.8, A), (2, 0.8, -1.0), (1.5, 0.8, A)]:
        with pytest.raises(InvalidParameter):
            classify(*args)
    with pytest.raises(InvalidParameter):
        classify(2, 0.85, A, lam=-1.0)


@pytest.mark.parametrize("kappa,H", [(1, 0.7), (2, 0.85), (2, 0.9), (3, 0.9)])
def test_boundary_sweep(kappa, H):
    hss = 1 - kappa * (1 - H)
    a_star = 1 / hss
    if not 1 < a_star < 2:
        pytest.skip("boundary outside (1, 2)")
    alphas = np.linspace(a_star - 0.2, a_star + 0.2, 128)
    labels = [classify(kappa, H, a, lam=1.0).name for a in alphas if 1 < a < 2]
    kept = [a for a in alphas if 1 < a < 2]
    for a, lab in zip(kept, labels):
        if a < a_star and abs(a - a_star) > 1e-9:
            assert lab == "Stable"
        elif a > a_star and abs(a - a_star) > 1e-9:
            assert lab == "Hermite"
    assert "Mixed" not in labels
    assert classify(kappa, H, a_star, lam=1.0).name == "Mixed"


@given(c=st.floats(0.1, 10), k=st.integers(1, 3), p=st.floats(-1, 1))
def test_lambda_scaling(c, k, p):
    l3 = SlowlyVaryingSpec(0.8, 0.0)
    base = lambda_limit(SlowlyVaryingSpec(1.0, 0.0), k, l3)
    assert lambda_limit(SlowlyVaryingSpec(c, 0.0), k, l3) == pytest.approx(base * c**k)
    # a log factor sends lambda to 0 or infinity, never a finite value
    lam = lambda_limit(SlowlyVaryingSpec(c, p), k, l3)
    if p > 0:
        assert lam == math.inf
    elif p < 0:
        assert lam == 0.0


@given(H=st.floats(0.51, 0.99), alpha=st.floats(1.01, 1.99), lam=st.floats(0, 1e6))
def test_lambda_never_flips_off_boundary(H, alpha, lam):
    side = on_boundary(2, H, alpha)
    r = classify(2, H, alpha, lam=lam)
    if side > 0:
        assert isinstance(r, HermiteLimit)
    elif side < 0:
        assert isinstance(r, StableLimit)


def test_stable_sigma_values():
    assert stable_sigma(1.0) == math.pi / 2
    # independent gamma (mpmath) for the closed form
    s15 = float((mpmath.gamma(mpmath.mpf("0.5")) * mpmath.cos(3 * mpmath.pi / 4) / mpmath.mpf("-0.5")) ** (mpmath.mpf(2) / 3))
    assert abs(stable_sigma(1.5) - s15) < 1e-10
    assert s15 == pytest.approx((2 * math.pi) ** (1 / 3), abs=1e-12)
    assert stable_sigma(0.5) == pytest.approx(math.pi / 2, abs=1e-12)
    with pytest.raises(InvalidParameter):
        stable_sigma(2.0)


def test_stable_sigma_positive():
    grid = np.linspace(0, 2, 1002)[1:-1]
    grid = grid[np.abs(grid - 1) > 1e-12]
    s = np.array([stable_sigma(a) for a in grid])
    assert np.all(s > 0) and np.all(np.isfinite(s))


def test_psi_three_ways():
    a, b, c = psi_by_parts(), psi_fourier(), psi_closed_form()
    assert abs(a - b) < 1e-8 and abs(a - c) < 1e-8 and abs(b - c) < 1e-8
    assert psi_constant(1e-10) == pytest.approx(1.5675142209478674, abs=1e-10)
    with pytest.raises(InvalidParameter):
        psi_constant(1e-13)


def test_psi_mpmath():
    v = mpmath.log(mpmath.pi) + mpmath.quad(lambda u: (mpmath.sin(u) - u) / u**2, [0, 1]) \
        + mpmath.quadosc(lambda u: mpmath.sin(u) / u**2, [1, mpmath.inf], omega=1)
    assert abs(float(v) - psi_constant()) < 1e-10


def test_psi_integrand_facts():
    u = 1e-6
    assert abs((math.sin(u) - u) / u**2) < 1e-6
    # |int_U^inf sin u/u^2| <= 1/U
    U = 50.0
    tail = float(mpmath.quadosc(lambda x: mpmath.sin(x) / x**2, [U, mpmath.inf], omega=1))
    assert abs(tail) <= 1 / U


def test_hermite_plan_scale():
    lrd = LrdConfig(0.9)
    reg = classify(2, 0.9, A)
    plan = normalization_plan(reg, PowerAbs(-0.7, True), lrd, None)
    L = effective_l1(lrd).c
    for n in (2**10, 2**14):
        assert plan.scale(n) == pytest.approx(L**-2 * n**-0.8, rel=1e-12)
    assert plan.centering(2**10, 1.0) == 0.0
    # the weights are renormalised, so the input constant of L1 does not matter
    other = normalization_plan(reg, PowerAbs(-0.7, True), LrdConfig(0.9, SlowlyVaryingSpec(5.0)), None)
    assert other.scale(1000) == pytest.approx(plan.scale(1000), rel=1e-12)


def test_stable_plan_scale():
    f = PowerAbs(-0.7, True)
    tail = fit_tail_model(f)
    plan = normalization_plan(classify(2, 0.6, A), f, LrdConfig(0.6), tail)
    assert plan.scale(2**14) == pytest.approx(1 / norming_constant(f, 2**14))
    with pytest.raises(RegimeMismatch):
        normalization_plan(classify(2, 0.6, A), f, LrdConfig(0.6), None)
    with pytest.raises(RegimeMismatch):
        normalization_plan(classify(2, 0.6, 1.2), f, LrdConfig(0.6), tail)
    with pytest.raises(RegimeMismatch):
        normalization_plan(classify(2, 0.9, A), f, LrdConfig(0.8), tail)


def test_alpha_one_plan():
    f = PowerAbs(-1.0)
    tail = fit_tail_model(f)
    reg = regime_for(f, LrdConfig(0.7), tail)
    plan = normalization_plan(reg, f, LrdConfig(0.7), tail)
    n = 2**12
    a = norming_constant(f, n)
    expected = (n * truncated_mean(f, a)) / a + 2 * psi_constant(1e-10) / math.pi
    assert plan.centering(n, 1.0) == pytest.approx(expected, rel=1e-12)
    assert plan.info["drift_rate"] == pytest.approx(2 * psi_constant() / math.pi)
    assert alpha1_drift_rate(1.0, "levy") == pytest.approx(1 - np.euler_gamma)
    with pytest.raises(InvalidParameter):
        alpha1_drift_rate(1.0, "other")


def test_plan_apply():
    reg = classify(1, 0.75, A)
    plan = normalization_plan(reg, HermiteFn(1), LrdConfig(0.75), None)
    sums = np.cumsum(np.concatenate([[0.0], np.ones(16)]))
    out = plan.apply(sums[None, :], 16, [0, 0.25, 0.5, 1.0])
    s = plan.scale(16)
    assert np.allclose(out[0], s * np.array([0, 4, 8, 16]))


def test_regime_for_boundary_lambda():
    lrd = LrdConfig(0.85)
    f = PowerAbs(-0.7, True)
    tail = fit_tail_model(f)
    r = regime_for(f, lrd, tail)
    assert isinstance(r, MixedLimit)
    assert r.lam == pytest.approx(effective_l1(lrd).c ** 2 / tail.l3.c)


def test_json_roundtrip():
    for r in (classify(2, 0.9, A), classify(2, 0.6, A), classify(2, 0.85, A, lam=2.0)):
        d = json.loads(json.dumps(r.to_dict()))
        assert regime_from_dict(d) == r
        assert "limit" in d and "exponent" in d
    plan = normalization_plan(classify(2, 0.6, A), PowerAbs(-0.7, True), LrdConfig(0.6), fit_tail_model(PowerAbs(-0.7, True)))
    assert json.loads(plan.to_json(1024))["scale_at_n"] > 0
    assert StableParams(1.5).to_dict()["sigma"] == 1.0
