"""Favard round trip over random reflection sequences.

For each (p, seed) draws H_1..H_N with norms up to --max-norm, synthesizes
the system, rebuilds it from the Bernstein-Szego measure and prints the
largest singular-value discrepancy.

    python3 scripts/roundtrip_sweep.py [--N 6] [--seeds 10] [--max-norm 0.9]
"""
import argparse
import time

import numpy as np

from mopuc.recurrence import ReflectionSequence, roundtrip


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--N", type=int, default=6)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--max-norm", type=float, default=0.9)
    args = parser.parse_args()
    for p in (1, 2, 3):
        t0 = time.perf_counter()
        gaps = [
            roundtrip(ReflectionSequence.random(np.random.default_rng(s), p, args.N, args.max_norm))
            for s in range(args.seeds)
        ]
        dt = time.perf_counter() - t0
        print(f"p={p} N={args.N} seeds={args.seeds}: max discrepancy {max(gaps):.2e} ({dt:.1f}s)")


if __name__ == "__main__":
    main()
