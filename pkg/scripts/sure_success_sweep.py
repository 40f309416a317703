"""Sure-success phases over N = 2^6 .. 2^20 and K in {2, 4, 8} in the reduced model,
plus the full state-vector cross-check up to N = 2^12."""

import argparse
import csv
import io
from pathlib import Path

from qsearch.state import BlockLayout
from qsearch.sure_success import full_cross_check, sweep_rows, SWEEP_COLUMNS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--min-exp", type=int, default=6)
    ap.add_argument("--max-exp", type=int, default=20)
    ap.add_argument("--full-max-exp", type=int, default=12)
    ap.add_argument("--k", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--out", type=Path, default=Path("results/sure_success_sweep.csv"))
    args = ap.parse_args()

    ns = [2 ** e for e in range(args.min_exp, args.max_exp + 1)]
    rows = sweep_rows(ns, args.k)
    for row in rows:
        small = row["N"] <= 2 ** args.full_max_exp and row["feasible"] and row["B"] > 2
        row["full_cross_check"] = full_cross_check(BlockLayout(row["N"], row["K"])) if small else ""

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=[*SWEEP_COLUMNS, "full_cross_check"], lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(buf.getvalue())
    print(buf.getvalue(), end="")


if __name__ == "__main__":
    main()
