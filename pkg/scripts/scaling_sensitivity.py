"""Sensitivity of mu, nu and alpha to the sweep window, grid and collapse window.

Each (window, steps) pair is swept once for all sizes; the collapse is then
refit for every x_max.  Prints a table and writes it as CSV.

    python scripts/scaling_sensitivity.py --out runs/sensitivity
"""

import argparse
import csv
import itertools
import os
import time

from kitaev_fs import EvolutionLine, collapse, find_peaks, fit_mu, sweep
from kitaev_fs.errors import CollapseError


def parse_window(text):
    lo, hi = (float(v) for v in text.split(":"))
    return lo, hi


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", default="201,301,401,501,601,701,801,901")
    ap.add_argument("--windows", nargs="+", default=["0.46:0.54", "0.48:0.52", "0.44:0.56"])
    ap.add_argument("--steps", nargs="+", type=int, default=[1000, 2000])
    ap.add_argument("--x-max", nargs="+", type=float, default=[0.5, 1.0, 2.0])
    ap.add_argument("--out", default="runs/sensitivity")
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    line = EvolutionLine.jx_eq_jy()
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for win, steps in itertools.product(args.windows, args.steps):
        lo, hi = parse_window(win)
        t0 = time.time()
        recs = [sweep(line, lo, hi, steps, L) for L in sizes]
        mu, mu_err = fit_mu(sizes, [find_peaks(r).chi_max for r in recs])
        for x_max in args.x_max:
            try:
                res = collapse(recs, x_max=x_max)
                nu, nu_err, alpha = res.nu, res.nu_stderr, res.alpha
            except CollapseError:
                nu = nu_err = alpha = float("nan")
            rows.append([win, steps, (hi - lo) / (steps - 1), x_max, mu, mu_err, nu, nu_err, alpha])
            print(
                f"window {win} steps {steps:5d} x_max {x_max:4.1f}: "
                f"mu {mu:.4f}+-{mu_err:.4f} nu {nu:.4f}+-{nu_err:.4f} alpha {alpha:.4f}  ({time.time() - t0:.0f} s)",
                flush=True,
            )

    path = os.path.join(args.out, "sensitivity.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window", "steps", "dlambda", "x_max", "mu", "mu_stderr", "nu", "nu_stderr", "alpha"])
        w.writerows(rows)
    print("wrote", path)


if __name__ == "__main__":
    main()
