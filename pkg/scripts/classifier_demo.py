#!/usr/bin/env python3
"""Five-condition classification of the moving-bump descriptor families."""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mm_lab import ExperimentSpec, run_suite  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="experiments")
    args = ap.parse_args()
    res = run_suite(ExperimentSpec(suite="classifier_demo", params={},
                                   out_dir=args.out))
    for line in res.summary:
        print(line)
    return 0 if res.passed else 1


if __name__ == "__main__":
    sys.exit(main())
