"""Optimal GRK parameters, block angle and query savings for a range of block counts."""

import argparse
from pathlib import Path

from qsearch.partial import plan_table_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3, 4, 5, 8, 10, 16, 32, 100])
    ap.add_argument("--out", type=Path, default=Path("results/plan_table.csv"))
    args = ap.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    text = plan_table_csv(args.k)
    args.out.write_text(text)
    print(text, end="")


if __name__ == "__main__":
    main()
