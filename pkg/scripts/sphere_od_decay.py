#!/usr/bin/env python3
"""Observable-diameter decay of unit spheres against dimension.

Writes sphere_od_decay.csv / .svg and prints the fitted log-log slope.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mm_lab import ExperimentSpec, run_suite  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="experiments")
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--kappa", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--budget", type=int, default=20000)
    args = ap.parse_args()
    res = run_suite(ExperimentSpec(
        suite="sphere_od_decay",
        params={"N": args.N, "kappa": args.kappa, "seed": args.seed,
                "budget": args.budget},
        out_dir=args.out))
    for line in res.summary:
        print(line)
    print(f"artifacts: {res.csv_path}, {res.svg_path}")
    return 0 if res.passed else 1


if __name__ == "__main__":
    sys.exit(main())
