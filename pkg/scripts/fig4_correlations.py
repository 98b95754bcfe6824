"""Bond-bond correlations along the diagonal cut, with decay fits.

Gapless points get a power-law fit, gapped points an exponential fit that is
compared with the analytic correlation length (C decays at twice the rate
of the single-fermion sums, so the expected 1/xi_C is 2/xi).

    python scripts/fig4_correlations.py --L 101 --out runs/fig4
"""

import argparse
import csv
import os

import numpy as np

from kitaev_fs import EvolutionLine, correlation_length_theory, correlation_profile_fast, fit_exponential, fit_power_law


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=101)
    ap.add_argument("--jz", type=float, nargs="+", default=[0.2, 0.3, 0.4, 0.55, 0.6, 0.7])
    ap.add_argument("--out", default="runs/fig4")
    args = ap.parse_args()

    line = EvolutionLine.jx_eq_jy()
    os.makedirs(args.out, exist_ok=True)
    cuts = {}
    for jz in args.jz:
        c = line.point(jz)
        r, v = correlation_profile_fast(c, args.L).cut()
        cuts[jz] = v
        if jz < 0.5:
            fit = fit_power_law(r, v, window=(6, 14))
            print(f"J_z={jz:.2f}  power law, exponent {fit.exponent:.3f} +- {fit.stderr:.3f}")
        elif jz > 0.5:
            fit = fit_exponential(r, v, window=(3, 12), prefactor_power=None)
            theory = 2.0 / correlation_length_theory(jz)
            print(f"J_z={jz:.2f}  exponential, 1/xi {fit.inverse_length:.4f}  theory 2/xi {theory:.4f}  "
                  f"ratio {fit.inverse_length / theory:.4f}")

    path = os.path.join(args.out, f"cuts_L{args.L}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r"] + [f"C_jz{jz:g}" for jz in args.jz])
        for i, rr in enumerate(r):
            w.writerow([int(rr)] + ["%.17g" % cuts[jz][i] for jz in args.jz])
    print("wrote", path)


if __name__ == "__main__":
    main()
