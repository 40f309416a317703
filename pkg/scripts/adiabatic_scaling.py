"""Minimal runtime reaching fidelity 0.95 against N for the linear and local schedules,
with the fitted log-log exponent."""

import argparse
import csv
from pathlib import Path

from qsearch.adiabatic import scaling_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--min-exp", type=int, default=6)
    ap.add_argument("--max-exp", type=int, default=12)
    ap.add_argument("--fidelity", type=float, default=0.95)
    ap.add_argument("--schedules", nargs="+", default=["local", "linear"])
    ap.add_argument("--out", type=Path, default=Path("results/adiabatic_scaling.csv"))
    args = ap.parse_args()

    sizes = tuple(2 ** e for e in range(args.min_exp, args.max_exp + 1))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["schedule", "N", "T_min", "exponent"])
        for name in args.schedules:
            fit = scaling_fit(name, sizes, target_fidelity=args.fidelity)
            for n, t in zip(fit.sizes, fit.times):
                w.writerow([name, n, repr(t), repr(fit.exponent)])
            print(f"{name}: T ~ N^{fit.exponent:.3f}")


if __name__ == "__main__":
    main()
