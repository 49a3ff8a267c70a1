"""Survival of a Yule population that loses one individual at each epoch of a
kill schedule, for linear and logarithmic schedules over a range of horizons.

    python3 scripts/killed_yule_survival.py --reps 10000
"""

import argparse
import csv
import sys

from chunknet.analysis import estimate_survival
from chunknet.processes import KillSchedule

SCHEDULES = {
    "linear_1": lambda: KillSchedule.linear(1.0),
    "linear_2": lambda: KillSchedule.linear(2.0),
    "logarithmic": KillSchedule.logarithmic,
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mu", type=float, default=1.0)
    ap.add_argument("--w0", type=int, default=1)
    ap.add_argument("--horizons", type=float, nargs="+", default=[5.0, 10.0, 25.0, 50.0])
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["schedule", "horizon", "survival", "ci_half_width", "martingale_mean"])
    for name, make in SCHEDULES.items():
        for h in args.horizons:
            surv, mw = estimate_survival(args.mu, args.w0, make(), h, args.reps, args.seed)
            out.writerow([name, h, surv.mean, surv.ci_half_width, mw.mean])


if __name__ == "__main__":
    main()
