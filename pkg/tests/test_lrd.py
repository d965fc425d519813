import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrdlab.errors import EmbeddingNotPSD, InvalidHurst, LagOutOfRange, TruncationTooShort
from lrdlab.lrd import (GaussianSample, LrdConfig, SlowlyVaryingSpec, autocovariance, autocovariances,
                        build_coefficients, circulant_eigenvalues, effective_l1, fgn_autocovariance, mean_variance,
                        sample_exact_path, sample_fgn_circulant, sample_ma_path, stationary_autocovariance)
from lrdlab.rng import stream


def test_config_validation():
    with pytest.raises(InvalidHurst):
        LrdConfig(1.0)
    with pytest.raises(InvalidHurst):
        LrdConfig(0.0)
    with pytest.raises(TruncationTooShort):
        LrdConfig(0.7, M=1)
    assert LrdConfig(0.4).short_memory


def test_config_roundtrip():
    cfg = LrdConfig(0.8, SlowlyVaryingSpec(2.0, 0.5), 1024)
    assert LrdConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.hash() == LrdConfig.from_dict(cfg.to_dict()).hash()


@given(c=st.floats(0.01, 100), p=st.floats(-2, 2), t=st.sampled_from([0.5, 2.0, 10.0]))
def test_slowly_varying_ratio(c, p, t):
    L = SlowlyVaryingSpec(c, p)
    xs = np.geomspace(1e10, 1e200, 5)
    ratios = np.abs(L(t * xs) / L(xs) - 1)
    assert np.all(L(np.array([0.0, 1.0, 1e6])) > 0)
    # convergence is logarithmic, so check monotone shrinkage plus a loose bound
    assert ratios[-1] <= ratios[0] + 1e-15
    assert ratios[-1] < 0.02


@given(H=st.floats(0.51, 0.99), M=st.integers(2, 5000))
def test_normalisation(H, M):
    b = build_coefficients(LrdConfig(H, M=M)).b
    assert abs(math.fsum(b * b) - 1) < 1e-12
    assert np.all(b > 0)


def test_coefficient_ratio_h09():
    b = build_coefficients(LrdConfig(0.9, M=2 * 10**5 + 2)).b
    target = 2**-0.6
    # b_j is proportional to (j+1)^(H-3/2): the ratio error decays like 1/j
    r = [b[2 * j - 1] / b[j - 1] for j in (10**4, 10**5)]
    extrap = r[1] + (r[1] - r[0]) / 9
    assert abs(r[1] - target) < 1e-4
    assert abs(extrap - target) < 1e-8


def test_monotone_h075():
    b = build_coefficients(LrdConfig(0.75, M=2**18)).b
    assert np.all(b > 0)
    assert np.all(np.diff(b[1:]) < 0)


def test_autocovariance_basics():
    c = build_coefficients(LrdConfig(0.9, M=4096))
    assert autocovariance(c, 0) == pytest.approx(1.0, abs=1e-12)
    rho = autocovariances(c, 4096)
    assert np.all(rho > 0)
    with pytest.raises(LagOutOfRange):
        autocovariance(c, 4096)
    # direct sum at a few lags
    for k in (1, 17, 1000):
        assert rho[k] == pytest.approx(math.fsum(c.b[: c.M - k] * c.b[k:]), rel=1e-10)


def _aitken(r):
    d1, d2 = r[1] - r[0], r[2] - r[1]
    return r[2] - d2 * d2 / (d2 - d1)


def test_autocovariance_ratio_h09():
    target = 2**-0.2
    rho = stationary_autocovariance(LrdConfig(0.9), 4097)
    ratios = [rho[2 * k] / rho[k] for k in (512, 1024, 2048)]
    assert abs(_aitken(ratios) - target) < 5e-4
    # the truncated weights undershoot by a (k/M)^(2-2H) deficit that shrinks as M grows
    prev = 0.0
    for M in (2**20, 2**22):
        r = autocovariances(build_coefficients(LrdConfig(0.9, M=M)), 1025)
        cur = r[1024] / r[512]
        assert prev < cur < ratios[0]
        prev = cur


def test_untruncated_regular_variation():
    rho = stationary_autocovariance(LrdConfig(0.8), 2**14 + 1)
    k = np.arange(2**10, 2**14 + 1, 64)
    slope = np.polyfit(np.log(k), np.log(rho[k]), 1)[0]
    assert abs(slope - (2 * 0.8 - 2)) < 0.03
    assert rho[0] == pytest.approx(1.0, abs=1e-10)


def test_truncated_regular_variation():
    rho = autocovariances(build_coefficients(LrdConfig(0.7, M=2**22)), 2**14 + 1)
    k = np.arange(2**10, 2**14 + 1, 64)
    slope = np.polyfit(np.log(k), np.log(rho[k]), 1)[0]
    assert abs(slope - (2 * 0.7 - 2)) < 0.03


def test_effective_l1_matches_asymptote():
    # rho(k) ~ L^2 B(H-1/2, 2-2H) k^(2H-2), approached at rate k^(1/2-H)
    from scipy.special import beta

    cfg = LrdConfig(0.8)
    rho = stationary_autocovariance(cfg, 2**18 + 1)
    L = effective_l1(cfg).c
    r = [rho[k] / (L**2 * beta(0.3, 0.4) * k ** (-0.4)) for k in (2**14, 2**16, 2**18)]
    assert abs(_aitken(r) - 1) < 2e-3


def test_ma_determinism():
    c = build_coefficients(LrdConfig(0.8, M=4096))
    a = sample_ma_path(c, 1000, 3).values
    b = sample_ma_path(c, 1000, 3).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_ma_path(c, 1000, 4).values)


def test_ma_mean_within_oracle():
    c = build_coefficients(LrdConfig(0.8))
    n = 10**5
    x = sample_ma_path(c, n, 2024).values
    sd = math.sqrt(mean_variance(autocovariances(c, n), n))
    assert abs(x.mean()) < 4 * sd


@pytest.mark.slow
def test_ma_sample_autocovariance():
    # standard error from independent replicate paths (batch means across paths)
    c = build_coefficients(LrdConfig(0.8))
    n, reps = 10**5, 24
    lags = (1, 10, 100)
    est = np.empty((reps, len(lags)))
    for r in range(reps):
        x = sample_ma_path(c, n, 7000 + r).values
        est[r] = [np.mean(x[: n - k] * x[k:]) for k in lags]
    se = est.std(axis=0, ddof=1) / math.sqrt(reps)
    for j, k in enumerate(lags):
        assert abs(est[:, j].mean() - autocovariance(c, k)) < 4 * se[j]


def test_fgn_variance_and_white_noise():
    n = 10**5
    x = sample_fgn_circulant(0.7, n, 11).values
    # Var of the sample second moment from the exact fGn autocovariance
    g = fgn_autocovariance(0.7, n)
    se = math.sqrt(2 * mean_variance(g[:n] ** 2, n))
    assert abs(np.mean(x * x) - 1) < 4 * se
    w = sample_fgn_circulant(0.5, n, 12).values
    assert abs(np.mean(w[:-1] * w[1:])) < 4 / math.sqrt(n)


def test_fgn_variance_growth():
    ns = 2 ** np.arange(8, 15)
    reps = 400
    sums = {int(m): np.empty(reps) for m in ns}
    from lrdlab.lrd import fgn_sampler

    draw = fgn_sampler(0.9, int(ns[-1]))
    for r in range(reps):
        x = np.cumsum(draw(stream(99, r)))
        for m in ns:
            sums[int(m)][r] = x[m - 1]
    v = [sums[int(m)].var() for m in ns]
    slope = np.polyfit(np.log(ns), np.log(v), 1)[0]
    assert abs(slope - 1.8) < 0.05


def test_embedding_not_psd():
    bad = np.array([1.0, 0.99, -0.99, 0.99])
    with pytest.raises(EmbeddingNotPSD):
        circulant_eigenvalues(bad)


def test_exact_sampler_determinism():
    cfg = LrdConfig(0.7)
    a = sample_exact_path(cfg, 2048, 5)
    assert np.array_equal(a.values, sample_exact_path(cfg, 2048, 5).values)


def test_sample_serialisation(tmp_path):
    s = sample_ma_path(build_coefficients(LrdConfig(0.8, M=512)), 100, 9)
    s.to_csv(tmp_path / "s.csv")
    back = GaussianSample.from_csv(tmp_path / "s.csv")
    assert np.array_equal(back.values, s.values) and back.seed == 9 and back.meta["H"] == 0.8
    s.to_binary(tmp_path / "s.bin")
    back = GaussianSample.from_binary(tmp_path / "s.bin")
    assert np.array_equal(back.values, s.values) and back.config_hash == s.config_hash
    raw = (tmp_path / "s.bin").read_bytes()
    assert raw[:8] == b"LRDLAB\x00\x01" and len(raw) % 8 == 0
