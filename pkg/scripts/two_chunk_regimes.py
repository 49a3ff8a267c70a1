"""Two-chunk network: classification and simulated behaviour in each regime.

For each (mu1, mu2, nu) triple and arrival rate, prints the verdict and a
growth slope per coordinate measured over [horizon/2, horizon]. Triples in
the middle regime also get a saturated-threshold estimate first.

    python3 scripts/two_chunk_regimes.py --horizon 2000 --reps 50
"""

import argparse
import csv
import sys

from chunknet.analysis import classify, estimate_growth_slope, estimate_stationary_departure_rate
from chunknet.processes import ProcessSpec, TwoChunkParams

CASES = [
    ((2.0, 3.0, 2.0), [1.0, 10.0, 100.0]),
    ((0.5, 4.0, 1.0), [0.25, 1.0]),
    ((1.0, 1.0, 2.0), [1.0, 2.0]),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=float, default=2000.0)
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["mu1", "mu2", "nu", "lambda", "verdict", "regime", "slope0", "slope1", "slope2"])
    for (mu1, mu2, nu), lams in CASES:
        est = diag = None
        probe = TwoChunkParams(1.0, mu1, mu2, nu)
        if classify("TwoChunk", probe).regime.endswith("case 2"):
            spec = ProcessSpec("saturated", probe.saturated(), (0, 0), {"lumped": True})
            est, diag = estimate_stationary_departure_rate(spec, 5e4, reps=10, base_seed=args.seed)
        for lam in lams:
            params = TwoChunkParams(lam, mu1, mu2, nu)
            v = classify("TwoChunk", params, est, diag)
            spec = ProcessSpec("two_chunk", params, (0, 0, 0))
            slopes = [
                estimate_growth_slope(spec, c, args.horizon, args.reps, args.seed, from_time=args.horizon / 2).mean for c in range(3)
            ]
            out.writerow([mu1, mu2, nu, lam, v.verdict.value, v.regime, *slopes])


if __name__ == "__main__":
    main()
