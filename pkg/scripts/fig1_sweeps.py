"""chi_F/N along the jx = jy line for several sizes, plus the peak count in the B phase.

Writes one CSV per size through the CLI, then prints the peak summary.

    python scripts/fig1_sweeps.py --out runs/fig1
"""

import argparse
import json
import os
import sys

from kitaev_fs import EvolutionLine, find_peaks, sweep
from kitaev_fs.cli import main as cli


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="101,303,909")
    ap.add_argument("--lz", default="0.2:0.8:1200")
    ap.add_argument("--peak-window", default="0.3:0.45")
    ap.add_argument("--threads", default="1")
    ap.add_argument("--out", default="runs/fig1")
    args = ap.parse_args()

    code = cli(["sweep", "--line", "jx-eq-jy", "--lz", args.lz, "--sizes", args.sizes,
                "--threads", args.threads, "--out", args.out])
    with open(os.path.join(args.out, "sweep_summary.json")) as fh:
        summary = json.load(fh)
    for L, info in summary["peaks"].items():
        print(f"L={L:>4}  lambda_max={info['lambda_max']:.5f}  chi_max/N={info['chi_max_per_site']:.4f}")

    # inset: number of peaks in a fixed B-phase window on a fine grid
    lo, hi = (float(v) for v in args.peak_window.split(":"))
    line = EvolutionLine.jx_eq_jy()
    for L in (int(s) for s in args.sizes.split(",")):
        n = find_peaks(sweep(line, lo, hi, 2000, L)).count
        print(f"L={L:>4}  peaks in [{lo}, {hi}]: {n}  (per L: {n / L:.4f})")
    return code


if __name__ == "__main__":
    sys.exit(main())
