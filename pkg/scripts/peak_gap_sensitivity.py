"""How the peak/gap-minimum pairing rate depends on the lambda step and window.

    python scripts/peak_gap_sensitivity.py --L 51
"""

import argparse

from kitaev_fs import EvolutionLine, sweep
from kitaev_fs.scaling import peak_gap_pairing


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=51)
    ap.add_argument("--windows", nargs="+", default=["0.02:0.40", "0.02:0.45", "0.30:0.45", "0.40:0.49"])
    ap.add_argument("--steps", type=float, nargs="+", default=[2e-3, 1e-3, 5e-4, 2.5e-4])
    args = ap.parse_args()
    line = EvolutionLine.jx_eq_jy()
    print(f"{'window':>11} {'step':>8} {'peaks':>5} {'paired':>7}")
    for win in args.windows:
        lo, hi = (float(v) for v in win.split(":"))
        for step in args.steps:
            n = int(round((hi - lo) / step)) + 1
            frac, peaks, _ = peak_gap_pairing(sweep(line, lo, hi, n, args.L))
            print(f"{win:>11} {step:8.1e} {len(peaks):5d} {frac:7.1%}")


if __name__ == "__main__":
    main()
