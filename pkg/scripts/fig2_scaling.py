"""Finite-size scaling near the critical point: peak growth mu, collapse nu, alpha = mu/nu.

Runs the ``scale`` subcommand with its defaults (L = 201..901, window
[0.46, 0.54], 2000 steps) and prints the fitted exponents.  A couple of
minutes on one core.

    python scripts/fig2_scaling.py --out runs/fig2
"""

import argparse
import json
import os
import sys

from kitaev_fs.cli import main as cli


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="201,301,401,501,601,701,801,901")
    ap.add_argument("--lz", default="0.46:0.54:2000")
    ap.add_argument("--x-max", default="1.0")
    ap.add_argument("--out", default="runs/fig2")
    args = ap.parse_args()
    code = cli(["scale", "--sizes", args.sizes, "--lz", args.lz, "--x-max", args.x_max, "--out", args.out])
    with open(os.path.join(args.out, "scaling.json")) as fh:
        res = json.load(fh)
    if "error" in res:
        print("collapse failed:", res["error"])
        return code
    for key in ("mu", "nu", "alpha"):
        print(f"{key:5s} = {res[key]:.4f} +- {res[key + '_stderr']:.4f}")
    for L, lam in sorted(res["lambda_max"].items(), key=lambda kv: int(kv[0])):
        print(f"L={L:>4}  J_z^max={lam:.6f}  chi_max/N={res['chi_max'][L] / (2 * int(L) ** 2):.4f}")
    return code


if __name__ == "__main__":
    sys.exit(main())
