#!/usr/bin/env python3
"""Run every experiment at full scale and collect the run summaries.

Writes CSV data and JSON summaries under ./runs/<experiment>/ and prints
one line per experiment. Takes a few minutes; the singlet experiments
dominate. All runs are deterministic for a fixed --seed.
"""

import argparse
import sys
from pathlib import Path

from sqe_lab.cli import main as cli_main

FULL_SCALE = {
    "model-a": ["--total-n", "10000"],
    "born": ["--trials", "100000", "--n-sqe", "1000"],
    "relax-time": ["--trials", "100"],
    "evolve": ["--grid-size", "256", "--steps", "8", "--mode", "stochastic"],
    "corr": ["--trials", "100000", "--n-sqe", "1000"],
    "chsh": ["--trials", "100000", "--n-sqe", "1000"],
    "marginals": ["--trials", "20000", "--n-sqe", "1000"],
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", default="runs")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    worst = 0
    for experiment, extra in FULL_SCALE.items():
        out_dir = Path(args.out) / experiment
        code = cli_main([
            experiment, *extra,
            "--seed", str(args.seed),
            "--workers", str(args.workers),
            "--out", str(out_dir),
        ])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
