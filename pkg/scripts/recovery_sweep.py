"""Stochastic recovery on a builtin game across batch-size schedules.

Writes one JSON report and one per-trial CSV per schedule, plus a summary CSV.

    python3 scripts/recovery_sweep.py --game chicken --trials 20 --out results/recovery
"""

import argparse
import csv
from pathlib import Path

from nashpoly.harness import run_recovery_experiment
from nashpoly.stochastic import preset

SCHEDULES = ["bs_1000", "bs_500", "bs_400", "bs_200", "bs_100"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--game", default="chicken")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--first-seed", type=int, default=0)
    ap.add_argument("--schedules", nargs="+", default=SCHEDULES)
    ap.add_argument("--out", default="results/recovery")
    args = ap.parse_args()

    out = Path(args.out)
    rows = []
    for name in args.schedules:
        seeds = range(args.first_seed, args.first_seed + args.trials)
        report = run_recovery_experiment(args.game, preset(name), seeds=seeds)
        report.name = f"recovery:{args.game}_{name}"
        report.write(out)
        agg = report.aggregates
        rows.append({"schedule": name, "trials": args.trials, **agg})
        print(f"{name:8s} success {agg['success_rate']:.2f}  mean JS {agg['mean_js']}  "
              f"{agg['runtime']:.0f}s")
    with open(out / f"summary_{args.game}.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
