"""Draw the regime map over (H, alpha) for a given Hermite rank as SVG.

    python3 scripts/regime_map.py --kappa 2 --out regime_map.svg
"""

import argparse

import numpy as np

from lrdlab import svg
from lrdlab.regimes import classify


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kappa", type=int, default=2)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--out", default="regime_map.svg")
    args = ap.parse_args()
    Hs = np.linspace(0.51, 0.99, 49)
    alphas = np.linspace(1.01, 1.99, 50)
    labels = [[classify(args.kappa, h, a, args.lam).name for a in alphas] for h in Hs]
    with open(args.out, "w", newline="\n") as fh:
        fh.write(svg.regime_map(Hs, alphas, labels, f"regimes for rank {args.kappa}", {"kappa": args.kappa}))
    counts = {}
    for row in labels:
        for name in row:
            counts[name] = counts.get(name, 0) + 1
    print(args.out, counts)


if __name__ == "__main__":
    main()
