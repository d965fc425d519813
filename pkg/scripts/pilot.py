"""Run one case config end to end and print the marginal and scaling checks.

    python3 scripts/pilot.py configs/stable_case.json [--threads N]
"""

import argparse
import json
import time

from lrdlab.experiments import ExperimentConfig, load_thresholds, partial_sum_ensemble, self_similarity_test, verify_marginal


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--threads", type=int)
    args = ap.parse_args()
    doc = json.load(open(args.config))
    exp = {**doc.get("experiment", {}), "functional": doc["functional"], "lrd": doc["lrd"]}
    cfg = ExperimentConfig.from_dict(exp, threads=args.threads)
    th = load_thresholds(doc.get("thresholds"))
    t0 = time.perf_counter()
    e = partial_sum_ensemble(cfg)
    print("regime:", e.regime.to_dict()["limit"])
    r = verify_marginal(e, e.regime, 1.0, thresholds=th)
    print(f"marginal KS p={r.p_value:.4g} passed={r.passed} details={ {k: v for k, v in r.details.items() if k != 'regime'} }")
    try:
        s = self_similarity_test(e, thresholds=th)
        print(f"IQR scaling exponent {s.statistic:.3f} (expected {s.details['expected']:.3f})")
    except Exception as exc:  # grid without a doubling chain
        print("self-similarity skipped:", exc)
    print(f"{time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
