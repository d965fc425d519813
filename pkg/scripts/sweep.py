"""Sweep r for f = |x|^r - E|X|^r at fixed H and write the table to CSV.

    python3 scripts/sweep.py --H 0.75 --n 16384 --M 500 --out sweep.csv
"""

import argparse
import json

from lrdlab.experiments import boundary_annotation, power_example_sweep, sweep_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--H", type=float, default=0.75)
    ap.add_argument("--r", type=float, nargs="+", default=[-0.9, -0.8, -0.7, -0.6, -0.55, -0.3])
    ap.add_argument("--n", type=int, default=2**14)
    ap.add_argument("--M", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()
    rows = power_example_sweep(args.H, args.r, args.n, args.M, args.seed)
    with open(args.out, "w", newline="\n") as fh:
        fh.write(sweep_csv(rows))
    print(json.dumps(boundary_annotation(args.H), indent=2))
    for row in rows:
        print(row["r"], row["regime"], row["ks_p"])


if __name__ == "__main__":
    main()
