#!/usr/bin/env python3
"""Sweep ensemble size and trial count to watch Born frequencies converge.

For a fixed setting offset, the measured +1 frequency approaches the
transition weight cos^2(offset/2) with the usual binomial error in the
trial count; the ensemble size controls per-trial volume fluctuations but
not the mean. Emits a CSV to stdout.
"""

import argparse
import math
import sys

from sqe_lab.grid import AlphaGrid
from sqe_lab.measurement import born_outcomes
from sqe_lab.seeding import derive_seed


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--offset-degrees", type=int, default=60)
    args = parser.parse_args()

    grid = AlphaGrid(360)
    meas = args.offset_degrees % 360
    weight = 0.5 * (1.0 + math.cos(math.radians(meas)))

    print("n_sqe,trials,freq_plus,weight,abs_err,sigma")
    for n_sqe in (50, 200, 1000):
        for trials in (1000, 10_000, 100_000):
            out = born_outcomes(
                derive_seed(args.seed, ("sweep", n_sqe, trials, "u")),
                derive_seed(args.seed, ("sweep", n_sqe, trials, "m")),
                derive_seed(args.seed, ("sweep", n_sqe, trials, "sp")),
                grid, 0, meas, n_sqe, 0, trials,
            )
            freq = float((out == 1).mean())
            sigma = math.sqrt(weight * (1 - weight) / trials)
            print(f"{n_sqe},{trials},{freq!r},{weight!r},{abs(freq - weight)!r},{sigma!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
