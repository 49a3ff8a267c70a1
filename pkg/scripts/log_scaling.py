"""Logarithmic growth of extinction times and hitting times.

Prints the mean extinction time of the killed W population against w0 and
the mean V-chain hitting time of [0, K] against v, each with its affine fit
in log(x).

    python3 scripts/log_scaling.py --reps 100
"""

import argparse
import csv
import sys

from chunknet.analysis import estimate_h0_scaling, estimate_nk
from chunknet.processes import RbhParams, VChainParams


def emit(out, name, tab):
    for row, res in zip(tab.rows, tab.residuals):
        e = row.estimate
        out.writerow([name, row.x, e.mean, e.ci_half_width, row.excluded, res])
    out.writerow([f"{name}_fit", "", tab.slope, tab.intercept, "", tab.max_rel_residual])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mu-w", type=float, default=0.1)
    ap.add_argument("--mu-z", type=float, default=2.0)
    ap.add_argument("--nu", type=float, default=1.0)
    ap.add_argument("--p", type=float, default=0.5, help="V-chain thinning probability")
    ap.add_argument("--K", type=int, default=50)
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rbh = RbhParams(args.mu_z, args.nu)
    grid = [1, 10, 100, 1000, 10**4]
    out = csv.writer(sys.stdout, lineterminator="\n")
    # fit rows reuse the columns as slope, intercept, max relative residual
    out.writerow(["quantity", "x", "mean", "ci_half_width", "excluded", "residual"])
    emit(out, "h0", estimate_h0_scaling(args.mu_w, rbh, grid, args.reps, args.seed))
    emit(out, "nk", estimate_nk(VChainParams(args.p, args.mu_w, rbh), args.K, grid, args.reps, args.seed))


if __name__ == "__main__":
    main()
