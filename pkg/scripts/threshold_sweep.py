"""Closed-form stability threshold vs simulated stationary departure rate.

Sweeps rho = mu/nu for the birth-death process with birth rate mu*(z v 1)
and death rate nu*z, and prints one CSV row per point.

    python3 scripts/threshold_sweep.py --rho 0.25 0.5 0.75 --events 1.2e6
"""

import argparse
import csv
import sys
import time

from chunknet.analysis import estimate_stationary_departure_rate, lambda_star
from chunknet.processes import ProcessSpec, RbhParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.1, 0.25, 0.5, 0.75, 0.9])
    ap.add_argument("--nu", type=float, default=2.0)
    ap.add_argument("--events", type=float, default=1.2e6, help="target events per point, summed over reps")
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["rho", "lambda_star", "estimate", "ci_half_width", "rel_err", "stabilized", "events", "seconds"])
    for k, rho in enumerate(args.rho):
        mu = rho * args.nu
        lam = lambda_star("FreeOrOne", mu, args.nu)
        horizon = args.events / (2 * lam * args.reps)
        t0 = time.perf_counter()
        est, diag = estimate_stationary_departure_rate(
            ProcessSpec("rbh", RbhParams(mu, args.nu), (0,)), horizon, reps=args.reps, base_seed=args.seed + k
        )
        out.writerow(
            [rho, lam, est.mean, est.ci_half_width, abs(est.mean - lam) / lam, diag.stabilized, diag.events, round(time.perf_counter() - t0, 2)]
        )


if __name__ == "__main__":
    main()
