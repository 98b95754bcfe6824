"""Peaks of chi_F against minima of the gap and the lowest excitations in the B phase.

    python scripts/fig3_peaks_gap.py --L 51 --out runs/fig3
"""

import argparse
import csv
import os

import numpy as np

from kitaev_fs import EvolutionLine, lowest_excitations, sweep
from kitaev_fs.scaling import peak_gap_pairing


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=51)
    ap.add_argument("--lo", type=float, default=0.02)
    ap.add_argument("--hi", type=float, default=0.40)
    ap.add_argument("--step", type=float, default=1e-3)
    ap.add_argument("--levels", type=int, default=6)
    ap.add_argument("--out", default="runs/fig3")
    args = ap.parse_args()

    line = EvolutionLine.jx_eq_jy()
    steps = int(round((args.hi - args.lo) / args.step)) + 1
    rec = sweep(line, args.lo, args.hi, steps, args.L)
    frac, peaks, minima = peak_gap_pairing(rec)
    print(f"L={args.L}: {len(peaks)} peaks, {len(minima)} gap minima, paired fraction {frac:.3f}")
    for p in peaks:
        near = minima[np.argmin(np.abs(minima - p))] if len(minima) else float("nan")
        print(f"  peak at {p:.4f}   nearest gap minimum {near:.4f}")

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"levels_L{args.L}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "chi_f"] + [f"e{k}" for k in range(args.levels)])
        for lam, chi in zip(rec.lam, rec.chi):
            ex = lowest_excitations(line.point(lam), args.L, args.levels)
            w.writerow(["%.17g" % lam, "%.17g" % chi] + ["%.17g" % e for e in ex])
    print("wrote", path)


if __name__ == "__main__":
    main()
