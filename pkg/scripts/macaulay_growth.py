"""Macaulay matrix size as the Tsallis exponent shrinks, for a few game shapes.

    python3 scripts/macaulay_growth.py --pairs 2x2 3x3 5x5 --tau-invs 1 3 5 7 9
"""

import argparse
import csv
import sys
from pathlib import Path

from nashpoly.harness import macaulay_growth_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", nargs="+", default=["2x2", "3x3", "5x5"])
    ap.add_argument("--tau-invs", type=int, nargs="+", default=[1, 3, 5, 7, 9])
    ap.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    args = ap.parse_args()
    pairs = [tuple(int(a) for a in p.split("x")) for p in args.pairs]
    rows = macaulay_growth_table(pairs, args.tau_invs)
    fh = open(Path(args.out), "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
