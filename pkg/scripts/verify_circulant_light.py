#!/usr/bin/env python3
"""Circulant light-profile run: fluctuation covariances against the
k!-diagonal kernel with standard normal entries.

Equivalent to:
  explodingmoments verify --model circulant --profile light --n 512 \
      --kmax 3 --reps 20000 --seed 20240801
"""

import sys

from explodingmoments.cli import ExperimentConfig, dispatch


def main():
    cfg = ExperimentConfig(
        command="verify",
        model="circulant",
        n=(512,),
        kmax=3,
        reps=20000,
        seed=20240801,
        profile="light",
    )
    code, doc = dispatch(cfg)
    for row in doc["rows"]:
        if row["l"] is None:
            continue
        print(
            f"Cov(Z({row['k']}), Z({row['l']})): predicted={row['predicted']} "
            f"empirical={float(row['empirical']):+.4f} z={float(row['zscore']):+.2f} "
            f"pass={row['pass']}"
        )
    print("all passed" if doc["all_passed"] else "FAILURES above")
    return code


if __name__ == "__main__":
    sys.exit(main())
