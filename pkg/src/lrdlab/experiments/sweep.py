"""The ``|x|^r`` example across a grid of exponents."""

from __future__ import annotations

import csv
import io
import math

from ..chaos import rank_or_none
from ..errors import RegimeMismatch
from ..functionals import PowerAbs
from ..lrd import LrdConfig, SlowlyVaryingSpec
from ..regimes import on_boundary
from .config import ExperimentConfig, load_thresholds
from .ensemble import partial_sum_ensemble
from .verify import self_similarity_test, verify_marginal

SWEEP_COLUMNS = ("r", "alpha", "kappa", "regime", "ks_p", "slope", "n", "M", "seed")


def boundary_annotation(H: float) -> dict:
    """Where the regime flips for ``f = |x|^r`` with rank two."""
    r_star = 1 - 2 * H
    recip = 1 / (1 - 2 * H)
    return {
        "H": H,
        "r_boundary": r_star,
        "rule": "stable for r in (-1, 1-2H), Hermite for r in (1-2H, -1/2); the exponents 1/alpha = -r and 1 - 2(1-H) cross at r = 1-2H",
        "reciprocal_form": recip,
        "reciprocal_form_note": "the interval (-1, 1/(1-2H)) is empty for H > 1/2; not used",
    }


def power_example_sweep(H: float, r_grid, n: int = 2**14, M: int = 2000, seed: int = 0,
                        grid=(0.0, 0.25, 0.5, 1.0), threads: int | None = None, l1: SlowlyVaryingSpec | None = None,
                        thresholds: dict | None = None) -> list[dict]:
    th = thresholds or load_thresholds()
    lrd = LrdConfig(H, l1 or SlowlyVaryingSpec())
    rows = []
    for r in r_grid:
        f = PowerAbs(float(r), centered=-1 < r < 0)
        kappa = rank_or_none(f) if r > -1 else None
        cfg = ExperimentConfig(f, lrd, n=n, grid=grid, M=M, seed=seed, threads=threads)
        alpha = -1 / r
        row = {"r": float(r), "alpha": alpha, "kappa": kappa if kappa is not None else "", "n": n, "M": M, "seed": seed}
        try:
            e = partial_sum_ensemble(cfg, threads)
        except RegimeMismatch:
            # light tails and short-range chaos: Gaussian limit, nothing to test here
            row.update(regime="OutOfScope", ks_p=math.nan, slope=math.nan)
            rows.append(row)
            continue
        rep = verify_marginal(e, e.regime, 1.0, thresholds=th)
        ss = self_similarity_test(e, thresholds=th)
        row.update(regime=e.regime.name, ks_p=rep.p_value, slope=ss.statistic)
        if kappa is not None and alpha > 1:
            row["boundary_side"] = on_boundary(kappa, H, alpha)
        rows.append(row)
    return rows


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v


__all__ = ["SWEEP_COLUMNS", "boundary_annotation", "power_example_sweep", "sweep_csv"]
