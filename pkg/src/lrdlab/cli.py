"""Command-line front end: ``lrdlab <subcommand> [options]``.

Exit codes: 0 success, 2 configuration or usage error, 3 a check failed
under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import svg
from .chaos import DEFAULT_K, DEFAULT_NODES, chaos_coefficients
from .errors import ConfigError, LrdLabError, RegimeMismatch
from .experiments import (ExperimentConfig, boundary_annotation, default_threads, limit_sample, load_thresholds,
                          partial_sum_ensemble, power_example_sweep, self_similarity_test, sweep_csv,
                          verify_marginal)
from .experiments.stats import _plain
from .functionals import functional_from_dict
from .limits import HermiteDiscretization, hermite_process_sample, stable_levy_path
from .lrd import LrdConfig, autocovariances, build_coefficients, sample_exact_path, sample_ma_path
from .regimes import StableParams, classify, stable_sigma
from .rng import config_hash
from .tails import NormingSequence, fit_tail_model

SECTIONS = {"functional", "lrd", "tail_overrides", "experiment", "thresholds"}
DEFAULT_SEED = 20240601
EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 2, 3


class StrictFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# config loading


def _line_of(text: str, key: str) -> int | None:
    needle = json.dumps(key)
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _config_error(path, text: str, msg: str, key: str | None = None) -> ConfigError:
    line = _line_of(text, key) if key else None
    if line is None:
        return ConfigError(f"{path}: {msg}")
    src = text.splitlines()[line - 1].strip()
    return ConfigError(f"{path}:{line}: {msg}\n    {src}")


def load_config(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        src = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {src.strip()}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    for k in doc:
        if k not in SECTIONS:
            raise _config_error(path, text, f"unknown section {k!r} (expected one of {sorted(SECTIONS)})", k)
    for k in doc.get("experiment", {}):
        if k not in _EXPERIMENT_KEYS:
            raise _config_error(path, text, f"unknown experiment key {k!r}", k)
    try:
        if "thresholds" in doc:
            load_thresholds(doc["thresholds"])
        if "functional" in doc:
            functional_from_dict(doc["functional"])
        if "lrd" in doc:
            LrdConfig.from_dict(doc["lrd"])
        _experiment_config(doc, None)
    except LrdLabError as exc:
        key = None
        msg = str(exc)
        if "[" in msg and "'" in msg:
            key = msg.split("'")[1]
        raise _config_error(path, text, msg, key) from None
    except KeyError as exc:
        raise _config_error(path, text, f"missing key {exc}") from None
    doc["_text_hash"] = config_hash(doc)
    return doc


_SWEEP_KEYS = {"r_grid", "H"}
_EXPERIMENT_KEYS = {"n", "grid", "M", "seed", "regime_override", "generator", "alpha1_drift", "lam",
                    "ref_size"} | _SWEEP_KEYS


def _experiment_config(doc: dict, args) -> ExperimentConfig | None:
    exp = dict(doc.get("experiment", {}))
    for k in _SWEEP_KEYS:
        exp.pop(k, None)
    if "functional" not in doc or "lrd" not in doc:
        return None
    exp["functional"] = doc["functional"]
    exp["lrd"] = doc["lrd"]
    if doc.get("tail_overrides"):
        exp["tail_overrides"] = doc["tail_overrides"]
    if args is not None and args.seed is not None:
        exp["seed"] = args.seed
    exp.setdefault("seed", DEFAULT_SEED)
    return ExperimentConfig.from_dict(exp, threads=getattr(args, "threads", None))


# ---------------------------------------------------------------------------
# output handling


class Outputs:
    """Tracks files written by a run so a failed run leaves nothing behind."""

    def __init__(self, out: Path, meta: dict, timestamps: bool):
        self.out = out
        self.meta = meta
        self.written: list[Path] = []
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamps else None
        self._made_dir = not out.exists()

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / name
        self.written.append(p)
        return p

    def json(self, name: str, obj: dict) -> Path:
        p = self.path(name)
        body = {"config_hash": self.meta["config_hash"], "seed": self.meta["seed"], **obj}
        p.write_text(json.dumps(_plain(body), indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
        return p

    def csv(self, name: str, text: str) -> Path:
        p = self.path(name)
        hdr = f"# config_hash={self.meta['config_hash']}\n# seed={self.meta['seed']}\n"
        p.write_text(hdr + text, encoding="utf-8", newline="\n")
        return p

    def svg(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_text(text, encoding="utf-8", newline="\n")
        return p

    def rollback(self) -> None:
        for p in self.written:
            p.unlink(missing_ok=True)
            p.with_suffix(".json").unlink(missing_ok=True) if p.suffix == ".csv" and p.name.startswith("path") else None
        if self._made_dir and self.out.exists() and not any(self.out.iterdir()):
            self.out.rmdir()

    def comments(self) -> dict:
        return {"config_hash": self.meta["config_hash"], "seed": self.meta["seed"]}


def _wants(args, fmt: str) -> bool:
    return fmt in args.format


def _rows_csv(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in r))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _need(doc, *keys):
    for k in keys:
        if k not in doc:
            raise ConfigError(f"config needs a {k!r} section")


def cmd_coeffs(args, doc, out: Outputs) -> int:
    _need(doc, "lrd")
    cfg = LrdConfig.from_dict(doc["lrd"])
    coeffs = build_coefficients(cfg)
    k = min(args.lags, coeffs.M)
    acov = autocovariances(coeffs, k)
    rows = [(j, coeffs.b[j], acov[j]) for j in range(k)]
    if _wants(args, "csv"):
        out.csv("coefficients.csv", _rows_csv(("j", "b", "rho"), rows))
    if _wants(args, "json"):
        out.json("coefficients.json", {"metadata": coeffs.metadata(), "b_head": coeffs.b[:k], "rho": acov})
    if _wants(args, "svg"):
        lag = np.arange(1, k)
        out.svg("autocovariance.svg", svg.loglog_plot(lag, {"rho(k)": acov[1:]}, "autocovariance", out.comments(), out.timestamp))
    return EXIT_OK


def cmd_sample(args, doc, out: Outputs) -> int:
    _need(doc, "lrd")
    cfg = LrdConfig.from_dict(doc["lrd"])
    n = args.n or doc.get("experiment", {}).get("n", 2**14)
    gen = doc.get("experiment", {}).get("generator", "exact")
    s = sample_exact_path(cfg, n, out.meta["seed"]) if gen == "exact" else sample_ma_path(build_coefficients(cfg), n, out.meta["seed"])
    if _wants(args, "csv"):
        s.to_csv(out.path("sample.csv"))
    if _wants(args, "json"):
        out.json("sample.json", {"header": s.header(), "values": s.values})
    return EXIT_OK


def cmd_chaos(args, doc, out: Outputs) -> int:
    _need(doc, "functional")
    dec = chaos_coefficients(functional_from_dict(doc["functional"]), args.K, args.nodes)
    out.json("chaos.json", dec.to_dict())
    if _wants(args, "csv"):
        out.csv("chaos.csv", _rows_csv(("k", "f_k"), [(k, c) for k, c in enumerate(dec.coeffs)]))
    print(dec.to_json())
    return EXIT_OK


def cmd_tail(args, doc, out: Outputs) -> int:
    _need(doc, "functional")
    f = functional_from_dict(doc["functional"])
    model = fit_tail_model(f)
    seq = NormingSequence(f)
    ns = [10**k for k in range(1, 8)]
    rows = [(n, seq(n)) for n in ns]
    out.json("tail.json", {"tail": model.to_dict(), "norming": rows, "l3": model.l3.to_dict()})
    if _wants(args, "csv"):
        out.csv("norming.csv", _rows_csv(("n", "a_n"), rows))
    print(model.to_json())
    return EXIT_OK


def cmd_classify(args, doc, out: Outputs) -> int:
    lam = None if args.lam is None else float(args.lam)
    reg = classify(args.kappa, args.hurst, args.alpha, lam, args.beta)
    d = reg.to_dict()
    if d.get("exponent") is not None:
        d["exponent"] = round(d["exponent"], 12)
    if args.out:
        out.json("classify.json", d)
    print(json.dumps(_plain(d), sort_keys=True))
    return EXIT_OK


def cmd_limit(args, doc, out: Outputs) -> int:
    seed = out.meta["seed"]
    grid = np.linspace(0, 1, args.points + 1)
    if args.kind == "stable":
        p = StableParams(args.alpha, stable_sigma(args.alpha) if args.sigma is None else args.sigma, args.beta, 0.0)
        paths = [stable_levy_path(p, grid, seed + i) for i in range(args.paths)]
    else:
        disc = HermiteDiscretization(times=tuple(grid[1:]), h=1 / (args.points * max(1, 256 // args.points)))
        paths = [hermite_process_sample(args.kappa, args.hurst, disc, seed + i) for i in range(args.paths)]
    for i, pth in enumerate(paths):
        pth.meta.update(out.comments())
        p = out.path(f"path_{i:04d}.csv")
        pth.to_csv(p)
        out.written.append(p.with_suffix(".json"))
    out.json("manifest.json", {"kind": args.kind, "paths": [f"path_{i:04d}.csv" for i in range(len(paths))]})
    return EXIT_OK


def cmd_verify(args, doc, out: Outputs) -> int:
    cfg = _experiment_config(doc, args)
    if cfg is None:
        raise ConfigError("verify needs 'functional' and 'lrd' sections")
    th = load_thresholds(doc.get("thresholds"))
    out.meta["config_hash"] = cfg.hash()
    e = partial_sum_ensemble(cfg, args.threads)
    reports = [verify_marginal(e, e.regime, 1.0, thresholds=th)]
    try:
        reports.append(self_similarity_test(e, thresholds=th))
    except LrdLabError as exc:
        print(f"self-similarity skipped: {exc}", file=sys.stderr)
    passed = all(r.passed for r in reports)
    out.json("report.json", {"plan": e.plan.to_dict(cfg.n), "reports": [r.to_dict() for r in reports], "passed": passed})
    if _wants(args, "csv"):
        cols = reports[0].CSV_COLUMNS
        out.csv("report.csv", _rows_csv(cols, [[r.to_dict()[c] for c in cols] for r in reports]))
        grid_cols = [f"t={t:g}" for t in e.grid]
        out.csv("ensemble.csv", _rows_csv(grid_cols, e.values.tolist()))
    if _wants(args, "svg"):
        ref = limit_sample(e.regime, 1.0, cfg.ref_size, cfg.seed)
        out.svg("marginal.svg", svg.histogram_overlay({"ensemble S_n(1)": e.column(1.0), "limit": ref},
                                                      "ensemble vs predicted limit", comments=out.comments(), timestamp=out.timestamp))
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: statistic={r.statistic:.6g} p={r.p_value}")
    if args.strict and not passed:
        raise StrictFailure("verification failed")
    return EXIT_OK


def cmd_sweep(args, doc, out: Outputs) -> int:
    exp = doc.get("experiment", {})
    H = float(exp.get("H", doc.get("lrd", {}).get("H", 0.9)))
    r_grid = exp.get("r_grid", [-0.9, -0.8, -0.7, -0.6, -0.5 + 1e-9, -0.3])
    rows = power_example_sweep(H, r_grid, exp.get("n", 2**14), exp.get("M", 2000), out.meta["seed"],
                               tuple(exp.get("grid", (0.0, 0.25, 0.5, 1.0))), args.threads,
                               thresholds=load_thresholds(doc.get("thresholds")))
    out.csv("sweep.csv", sweep_csv(rows))
    out.json("sweep.json", {"rows": rows, "boundary": boundary_annotation(H)})
    if _wants(args, "svg"):
        Hs = np.linspace(0.51, 0.99, 49)
        alphas = np.linspace(1.01, 1.99, 50)
        labels = [[classify(2, h, a, 1.0).name for a in alphas] for h in Hs]
        out.svg("regime_map.svg", svg.regime_map(Hs, alphas, labels, "regimes for rank 2", out.comments(), out.timestamp))
    return EXIT_OK


COMMANDS = {
    "coeffs": cmd_coeffs,
    "sample": cmd_sample,
    "chaos": cmd_chaos,
    "tail": cmd_tail,
    "classify": cmd_classify,
    "limit": cmd_limit,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def _formats(s: str) -> set:
    fm = set(s.split(","))
    bad = fm - {"csv", "json", "svg"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {sorted(bad)}")
    return fm


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config with sections functional, lrd, tail_overrides, experiment, thresholds")
    common.add_argument("--out", type=Path, help="output directory (default ./lrdlab-out)")
    common.add_argument("--seed", type=int, help=f"master seed (default: config value or {DEFAULT_SEED})")
    common.add_argument("--threads", type=int, help="worker threads (default: $LRDLAB_THREADS or CPU count, at most 8)")
    common.add_argument("--strict", action="store_true", help="exit 3 when a check fails")
    common.add_argument("--format", type=_formats, default={"csv", "json"}, help="comma list from csv,json,svg")
    common.add_argument("--timestamps", action="store_true", help="stamp SVG files with the run time")

    p = argparse.ArgumentParser(prog="lrdlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("coeffs", parents=[common], help="moving-average weights and autocovariances").add_argument("--lags", type=int, default=1024)
    sp = sub.add_parser("sample", parents=[common], help="draw a Gaussian sequence")
    sp.add_argument("--n", type=int)
    sp = sub.add_parser("chaos", parents=[common], help="Hermite coefficients and rank")
    sp.add_argument("--K", type=int, default=DEFAULT_K)
    sp.add_argument("--nodes", type=int, default=DEFAULT_NODES)
    sub.add_parser("tail", parents=[common], help="tail model and norming constants")
    sp = sub.add_parser("classify", parents=[common], help="limit regime for (kappa, H, alpha)")
    sp.add_argument("--kappa", type=int, required=True)
    sp.add_argument("--hurst", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--beta", type=float, default=1.0)
    sp = sub.add_parser("limit", parents=[common], help="sample limit-process paths")
    sp.add_argument("--kind", choices=("stable", "hermite"), default="stable")
    sp.add_argument("--alpha", type=float, default=1.5)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--kappa", type=int, default=2)
    sp.add_argument("--hurst", type=float, default=0.9)
    sp.add_argument("--points", type=int, default=64)
    sp.add_argument("--paths", type=int, default=1)
    sub.add_parser("verify", parents=[common], help="ensemble vs predicted limit")
    sub.add_parser("sweep", parents=[common], help="|x|^r example across exponents")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        try:
            args.threads = default_threads()
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    out = None
    try:
        doc = load_config(args.config) if args.config else {}
        seed = args.seed if args.seed is not None else doc.get("experiment", {}).get("seed", DEFAULT_SEED)
        chash = doc.pop("_text_hash", None) or config_hash({"argv": [a for a in (argv or sys.argv[1:])]})
        out = Outputs(args.out or Path("lrdlab-out"), {"config_hash": chash, "seed": seed}, args.timestamps)
        return COMMANDS[args.command](args, doc, out)
    except StrictFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except RegimeMismatch as exc:
        if out:
            out.rollback()
        print(f"regime mismatch: {exc}", file=sys.stderr)
        return EXIT_FAILED if args.strict else EXIT_CONFIG
    except (LrdLabError, FileNotFoundError) as exc:
        if out:
            out.rollback()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BaseException:
        if out:
            out.rollback()
        raise


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
