"""Query counts of the nested structured search divided by sqrt(N M), for N = M^2."""

import argparse
import csv
from pathlib import Path

from qsearch.structured import prefactor_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--exps", type=int, nargs="+", default=[2, 4, 6, 8, 10, 12, 14])
    ap.add_argument("--out", type=Path, default=Path("results/structured_prefactors.csv"))
    args = ap.parse_args()

    rows = prefactor_table([(2 ** (2 * e), 2 ** e) for e in args.exps])
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(f"N={r['N']:>10} literal {r['ratio_literal']:.4f} leading {r['ratio_leading']:.4f} "
              f"limit {r['limit']:.4f}")


if __name__ == "__main__":
    main()
