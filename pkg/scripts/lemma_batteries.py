#!/usr/bin/env python3
"""Run every inequality battery; each row must hold as a theorem."""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mm_lab import ExperimentSpec, run_suite  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="experiments")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    res = run_suite(ExperimentSpec(
        suite="lemma_batteries",
        params={"trials": args.trials, "seed": args.seed},
        out_dir=args.out))
    for line in res.summary:
        print(line)
    return 0 if res.passed else 1


if __name__ == "__main__":
    sys.exit(main())
