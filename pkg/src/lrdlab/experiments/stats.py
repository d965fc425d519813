"""Two-sample Kolmogorov-Smirnov and empirical characteristic function tools."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special


def ks_statistic(x, y) -> float:
    """``sup |F_x - F_y|`` over the pooled sample."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    pts = np.concatenate([x, y])
    fx = np.searchsorted(x, pts, side="right") / len(x)
    fy = np.searchsorted(y, pts, side="right") / len(y)
    return float(np.max(np.abs(fx - fy)))


def ks_pvalue(d: float, n: int, m: int) -> float:
    """Asymptotic Kolmogorov p-value with the effective-size correction."""
    en = math.sqrt(n * m / (n + m))
    return float(special.kolmogorov((en + 0.12 + 0.11 / en) * d))


def ks_two_sample(x, y) -> tuple[float, float]:
    d = ks_statistic(x, y)
    return d, ks_pvalue(d, len(x), len(y))


def ecf(x, theta) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    th = np.asarray(theta, dtype=float)
    out = np.empty(len(th), dtype=complex)
    for i, t in enumerate(th):
        out[i] = np.mean(np.exp(1j * t * x))
    return out


def theta_grid(spec) -> np.ndarray:
    lo, hi, k = spec
    return np.linspace(lo, hi, int(k))


@dataclass
class VerificationReport:
    name: str
    statistic: float
    p_value: float | None
    threshold: float
    passed: bool
    sizes: dict
    details: dict = field(default_factory=dict)
    config_hash: str | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "threshold": self.threshold,
            "passed": bool(self.passed),
            "sizes": self.sizes,
            "details": self.details,
            "config_hash": self.config_hash,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True)

    CSV_COLUMNS = ("name", "statistic", "p_value", "threshold", "passed", "config_hash", "seed")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        d = self.to_dict()
        w.writerow([d[c] for c in self.CSV_COLUMNS])
        return buf.getvalue()


def _plain(obj):
    """Make numpy scalars and non-finite floats JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
