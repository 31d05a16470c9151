"""Least-squares exploitability on random games, per size and regularization weight.

The CSV holds one row per game (violin-plot ready); the JSON sidecar holds
the config and per-setting medians and success rates.

    python3 scripts/lstsq_distributions.py --num-games 10000 --out results/lstsq
"""

import argparse
import json

from nashpoly.harness import LstsqExperimentConfig, run_lstsq_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--num-games", type=int, default=10_000)
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 5, 10])
    ap.add_argument("--gammas", type=float, nargs="+", default=[1.0, 0.5, 0.25])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/lstsq")
    args = ap.parse_args()
    cfg = LstsqExperimentConfig(tuple(args.sizes), tuple(args.gammas), args.num_games, args.seed)
    report = run_lstsq_experiment(cfg)
    report.write(args.out)
    print(json.dumps(report.aggregates, indent=2))


if __name__ == "__main__":
    main()
