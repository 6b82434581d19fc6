#!/usr/bin/env python3
"""Compare the paired product estimator against the baselines.

Runs paired / product / single at matched draw budgets on a few built-in
models and prints coverage of the 1+epsilon band, mean draws, and the
instance sample bound.

Usage: python3 scripts/compare_baselines.py [--reps 50] [--epsilon 0.1] [--seed 0]
"""

import argparse

from gibbs_partition.cli import COMPARE_FIELDS, ExperimentConfig, compare_methods, render_csv

MODELS = [("k2", 1.0), ("cycle-4", 1.0), ("const-2", 1.0)]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=50)
    parser.add_argument("--epsilon", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rows = []
    for model, beta in MODELS:
        config = ExperimentConfig(
            model=model,
            beta=beta,
            epsilon=args.epsilon,
            seed=args.seed,
            reps=args.reps,
        )
        rows.extend(compare_methods(config, ["paired", "product", "single"]))
    print(render_csv(rows, COMPARE_FIELDS), end="")


if __name__ == "__main__":
    main()
