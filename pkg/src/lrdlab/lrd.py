"""Long-range dependent Gaussian sequences.

The sequence is the causal moving average ``X_i = sum_j b_j xi_{i-j}`` with
``b_j`` proportional to ``(j+1)**(H-3/2) * L1(j+1)`` and unit variance. Three
generators are provided:

* ``sample_ma_path`` convolves innovations with the truncated weights
  (length ``M``), exactly as the truncated model is defined;
* ``sample_exact_path`` draws the *untruncated* moving average exactly in law,
  by circulant embedding of its autocovariance (computed with an analytic tail
  correction), which is what the Monte Carlo experiments use;
* ``sample_fgn_circulant`` draws fractional Gaussian noise, an independent
  process with the same covariance exponent, for cross-checks.
"""

from __future__ import annotations

import functools
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft as sfft
from scipy import signal, special

from .errors import EmbeddingNotPSD, InvalidHurst, InvalidParameter, LagOutOfRange, TruncationTooShort
from .rng import config_hash, stream

DEFAULT_M = 2**18


@dataclass(frozen=True)
class SlowlyVaryingSpec:
    """``L(x) = c * log(e + x)**p``; ``p = 0`` is the constant family."""

    c: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidParameter(f"slowly varying scale must be positive, got {self.c}")

    @property
    def family(self) -> str:
        return "Constant" if self.p == 0 else "LogPower"

    @classmethod
    def constant(cls, c: float = 1.0) -> "SlowlyVaryingSpec":
        return cls(c, 0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.p == 0:
            return self.c * np.ones_like(x)
        return self.c * np.log(np.e + x) ** self.p

    def scaled(self, k: float) -> "SlowlyVaryingSpec":
        return SlowlyVaryingSpec(self.c * k, self.p)

    def power(self, q: float) -> "SlowlyVaryingSpec":
        return SlowlyVaryingSpec(self.c**q, self.p * q)

    def to_dict(self) -> dict:
        return {"family": self.family, "c": self.c, "p": self.p}

    @classmethod
    def from_dict(cls, d: dict) -> "SlowlyVaryingSpec":
        unknown = set(d) - {"family", "c", "p"}
        if unknown:
            raise InvalidParameter(f"unknown slowly varying keys: {sorted(unknown)}")
        p = float(d.get("p", 0.0))
        if d.get("family") == "Constant" and p != 0:
            raise InvalidParameter("Constant family requires p = 0")
        return cls(float(d.get("c", 1.0)), p)


@dataclass(frozen=True)
class LrdConfig:
    H: float
    l1: SlowlyVaryingSpec = field(default_factory=SlowlyVaryingSpec)
    M: int = DEFAULT_M

    def __post_init__(self):
        if not 0 < self.H < 1:
            raise InvalidHurst(f"H must lie in (0, 1), got {self.H}")
        if self.M < 2:
            raise TruncationTooShort(f"truncation length M must be >= 2, got {self.M}")

    @property
    def short_memory(self) -> bool:
        return self.H <= 0.5

    def to_dict(self) -> dict:
        return {"H": self.H, "l1": self.l1.to_dict(), "M": self.M}

    @classmethod
    def from_dict(cls, d: dict) -> "LrdConfig":
        unknown = set(d) - {"H", "l1", "M"}
        if unknown:
            raise InvalidParameter(f"unknown lrd keys: {sorted(unknown)}")
        l1 = SlowlyVaryingSpec.from_dict(d["l1"]) if "l1" in d else SlowlyVaryingSpec()
        return cls(float(d["H"]), l1, int(d.get("M", DEFAULT_M)))

    def hash(self) -> str:
        return config_hash(self.to_dict())


def _raw_weights(H: float, l1: SlowlyVaryingSpec, start: int, stop: int) -> np.ndarray:
    # unnormalised g(x) = x**(H - 3/2) L1(x) at x = start..stop-1
    x = np.arange(start, stop, dtype=float)
    return x ** (H - 1.5) * l1(x)


@dataclass(frozen=True, eq=False)
class CoefficientSeq:
    b: np.ndarray
    H: float
    l1: SlowlyVaryingSpec
    norm_const: float  # b_j = norm_const * (j+1)**(H-3/2) * L1(j+1)
    tail_bound: float  # approximate mass sum_{j>=M} b_j**2 dropped by truncation

    @property
    def M(self) -> int:
        return len(self.b)

    @functools.cached_property
    def _acov(self) -> np.ndarray:
        m = self.M
        nfft = sfft.next_fast_len(2 * m, real=True)
        spec = sfft.rfft(self.b, nfft)
        return sfft.irfft(spec * np.conj(spec), nfft)[:m]

    def metadata(self) -> dict:
        return {
            "H": self.H,
            "M": self.M,
            "l1": self.l1.to_dict(),
            "b0_convention": "b_j uses (j+1)**(H-3/2) L1(j+1)",
            "truncation_tail_bound": self.tail_bound,
        }


def build_coefficients(cfg: LrdConfig) -> CoefficientSeq:
    g = _raw_weights(cfg.H, cfg.l1, 1, cfg.M + 1)
    s = math.fsum(g * g)
    norm = 1.0 / math.sqrt(s)
    b = g * norm
    # sum_{x > M} x**(2H-3) L(x)**2 <= integral from M, L treated as locally constant
    tail = norm**2 * float(cfg.l1(cfg.M)) ** 2 * cfg.M ** (2 * cfg.H - 2) / (2 - 2 * cfg.H)
    b.setflags(write=False)
    return CoefficientSeq(b=b, H=cfg.H, l1=cfg.l1, norm_const=norm, tail_bound=tail)


def autocovariance(coeffs: CoefficientSeq, k: int) -> float:
    """``sum_j b_j b_{j+k}`` over the truncated weights."""
    if not 0 <= k < coeffs.M:
        raise LagOutOfRange(f"lag {k} outside [0, {coeffs.M})")
    if k == 0:
        return float(math.fsum(coeffs.b * coeffs.b))
    return float(coeffs._acov[k])


def autocovariances(coeffs: CoefficientSeq, n_lags: int) -> np.ndarray:
    if n_lags > coeffs.M:
        raise LagOutOfRange(f"{n_lags} lags requested from M = {coeffs.M}")
    out = coeffs._acov[:n_lags].copy()
    out[0] = math.fsum(coeffs.b * coeffs.b)
    return out


# --------------------------------------------------------------------------
# untruncated model


def _tail_sums(H: float, l1: SlowlyVaryingSpec, J: int, lags: np.ndarray, nodes: int = 96) -> np.ndarray:
    """``sum_{j>=J} g(j+1) g(j+1+k)`` via Euler-Maclaurin with Gauss-Jacobi.

    The integral over ``[J, inf)`` is mapped to ``u = J/x`` in ``(0, 1]``, where
    the integrand behaves like ``u**(1-2H)`` times a smooth factor.
    """
    a = H - 1.5
    beta = -2 * a - 2
    y, w = special.roots_jacobi(nodes, 0.0, beta)
    u = (1 + y) / 2
    x = J / u
    k = lags[:, None].astype(float)
    fx = (x + 1) ** a * l1(x + 1)
    fxk = (x + 1 + k) ** a * l1(x + 1 + k)
    integrand = fx * fxk * J / u**2 / u**beta
    integral = 2.0 ** (-beta - 1) * integrand @ w
    first = (J + 1.0) ** a * l1(J + 1.0) * (J + 1.0 + lags) ** a * l1(J + 1.0 + lags)
    return integral + 0.5 * first


@functools.lru_cache(maxsize=16)
def _untruncated_raw(H: float, c: float, p: float, n_lags: int) -> tuple[np.ndarray, float]:
    l1 = SlowlyVaryingSpec(c, p)
    J = max(2**20, 8 * n_lags)
    g = _raw_weights(H, l1, 1, J + n_lags + 1)
    u = g[:J]
    nfft = sfft.next_fast_len(len(u) + len(g), real=True)
    head = sfft.irfft(np.conj(sfft.rfft(u, nfft)) * sfft.rfft(g, nfft), nfft)[: n_lags + 1]
    head[0] = math.fsum(u * u)
    lags = np.arange(n_lags + 1)
    raw = head + _tail_sums(H, l1, J, lags)
    return raw, float(raw[0])


def untruncated_norm(cfg: LrdConfig) -> float:
    """Scale ``c`` with ``sum_{j>=0} (c g(j+1))**2 = 1`` for the infinite sequence."""
    _, s = _untruncated_raw(cfg.H, cfg.l1.c, cfg.l1.p, 1)
    return 1.0 / math.sqrt(s)


def stationary_autocovariance(cfg: LrdConfig, n_lags: int) -> np.ndarray:
    """Autocovariance ``rho(0..n_lags)`` of the untruncated moving average."""
    raw, s = _untruncated_raw(cfg.H, cfg.l1.c, cfg.l1.p, int(n_lags))
    out = raw / s
    out.setflags(write=False)
    return out


def effective_l1(cfg: LrdConfig, truncated: bool = False) -> SlowlyVaryingSpec:
    """Slowly varying factor of the *normalised* weights, ``b_j ~ j**(H-3/2) L(j)``."""
    if truncated:
        norm = build_coefficients(cfg).norm_const
    else:
        norm = untruncated_norm(cfg)
    return cfg.l1.scaled(norm)


# --------------------------------------------------------------------------
# samples


@dataclass(frozen=True, eq=False)
class GaussianSample:
    values: np.ndarray
    seed: int
    config_hash: str
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    def header(self) -> dict:
        return {"seed": self.seed, "config_hash": self.config_hash, "n": len(self), **self.meta}

    def to_csv(self, path) -> None:
        hdr = self.header()
        lines = [f"# {k}={json.dumps(hdr[k])}" for k in sorted(hdr)]
        lines.append("value")
        lines.extend(repr(float(v)) for v in self.values)
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    @classmethod
    def from_csv(cls, path) -> "GaussianSample":
        hdr, vals = {}, []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                hdr[k] = json.loads(v)
            elif line != "value" and line:
                vals.append(float(line))
        seed, h = hdr.pop("seed"), hdr.pop("config_hash")
        hdr.pop("n", None)
        return cls(np.array(vals), seed, h, hdr)

    def to_binary(self, path) -> None:
        """32-byte preamble, JSON header, then little-endian float64 values.

        Preamble: magic ``LRDLAB\\0\\1``, JSON length, value count, reserved
        (all unsigned 64-bit little-endian). The JSON is space padded to a
        multiple of 8 bytes so the data block stays aligned.
        """
        blob = json.dumps(self.header(), sort_keys=True).encode()
        blob += b" " * (-len(blob) % 8)
        pre = _MAGIC + struct.pack("<QQQ", len(blob), len(self), 0)
        with open(path, "wb") as fh:
            fh.write(pre)
            fh.write(blob)
            fh.write(np.asarray(self.values, dtype="<f8").tobytes())

    @classmethod
    def from_binary(cls, path) -> "GaussianSample":
        raw = Path(path).read_bytes()
        if raw[:8] != _MAGIC:
            raise InvalidParameter("not an lrdlab sample file")
        jlen, n, _ = struct.unpack("<QQQ", raw[8:32])
        hdr = json.loads(raw[32 : 32 + jlen])
        vals = np.frombuffer(raw[32 + jlen : 32 + jlen + 8 * n], dtype="<f8").copy()
        seed, h = hdr.pop("seed"), hdr.pop("config_hash")
        hdr.pop("n", None)
        return cls(vals, seed, h, hdr)


_MAGIC = b"LRDLAB\x00\x01"


def sample_ma_path(coeffs: CoefficientSeq, n: int, seed: int) -> GaussianSample:
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    xi = stream(seed, 0).standard_normal(n + coeffs.M - 1)
    x = signal.fftconvolve(xi, coeffs.b, mode="valid")
    meta = {"generator": "ma", "H": coeffs.H, "M": coeffs.M, "l1": coeffs.l1.to_dict()}
    return GaussianSample(x, seed, config_hash(meta), meta)


def circulant_eigenvalues(acov: np.ndarray) -> np.ndarray:
    """Eigenvalues of the ``2n`` circulant built from ``acov[0..n]``."""
    row = np.concatenate([acov, acov[-2:0:-1]])
    lam = sfft.rfft(row).real
    if lam.min() < -1e-9:
        raise EmbeddingNotPSD(f"circulant embedding has eigenvalue {lam.min():.3e}")
    return np.clip(lam, 0.0, None)


def circulant_sample(lam_half: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """One exact Gaussian path of length ``n`` from precomputed eigenvalues."""
    m = 2 * n
    lam = np.concatenate([lam_half, lam_half[-2:0:-1]])
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return sfft.fft(np.sqrt(lam / m) * z)[:n].real


@functools.lru_cache(maxsize=16)
def _exact_eigs(H: float, c: float, p: float, n: int) -> np.ndarray:
    cfg = LrdConfig(H, SlowlyVaryingSpec(c, p))
    return circulant_eigenvalues(stationary_autocovariance(cfg, n))


def exact_path_sampler(cfg: LrdConfig, n: int):
    """Return ``draw(rng) -> ndarray`` sampling the untruncated sequence."""
    lam = _exact_eigs(cfg.H, cfg.l1.c, cfg.l1.p, int(n))
    return lambda rng: circulant_sample(lam, n, rng)


def sample_exact_path(cfg: LrdConfig, n: int, seed: int) -> GaussianSample:
    x = exact_path_sampler(cfg, n)(stream(seed, 0))
    meta = {"generator": "exact", "H": cfg.H, "M": None, "l1": cfg.l1.to_dict()}
    return GaussianSample(x, seed, config_hash(meta), meta)


def fgn_autocovariance(H: float, n_lags: int) -> np.ndarray:
    k = np.arange(n_lags + 1, dtype=float)
    return 0.5 * (np.abs(k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))


def fgn_sampler(H: float, n: int):
    if not 0 < H < 1:
        raise InvalidHurst(f"H must lie in (0, 1), got {H}")
    lam = circulant_eigenvalues(fgn_autocovariance(H, n))
    return lambda rng: circulant_sample(lam, n, rng)


def sample_fgn_circulant(H: float, n: int, seed: int) -> GaussianSample:
    x = fgn_sampler(H, n)(stream(seed, 0))
    meta = {"generator": "fgn", "H": H, "M": None}
    return GaussianSample(x, seed, config_hash(meta), meta)


def mean_variance(acov: np.ndarray, n: int) -> float:
    """Exact ``Var(mean of X_1..X_n)`` from ``acov[0..n-1]``."""
    k = np.arange(1, n)
    return (n * acov[0] + 2 * np.sum((n - k) * acov[1:n])) / n**2


__all__ = [
    "CoefficientSeq",
    "GaussianSample",
    "LrdConfig",
    "SlowlyVaryingSpec",
    "autocovariance",
    "autocovariances",
    "build_coefficients",
    "circulant_eigenvalues",
    "circulant_sample",
    "effective_l1",
    "exact_path_sampler",
    "fgn_autocovariance",
    "fgn_sampler",
    "mean_variance",
    "sample_exact_path",
    "sample_fgn_circulant",
    "sample_ma_path",
    "stationary_autocovariance",
    "untruncated_norm",
]
