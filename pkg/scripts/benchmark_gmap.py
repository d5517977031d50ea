"""Time the full vulnerability evaluation on synthetic tensors of growing size."""
from __future__ import annotations

import argparse
import time

import numpy as np

from cfia.io import tensor_from_records
from cfia.synthetic import random_records, random_thresholds
from cfia.vulnerability import ThresholdSet, gmap


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frs", type=int, default=4)
    ap.add_argument("--attempts", type=int, default=2)
    ap.add_argument("--morphs", type=int, nargs="+", default=[100, 1000, 5000])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'morphs':>8} {'build s':>9} {'eval s':>9} {'G-MAP':>8}")
    for n in args.morphs:
        records = random_records(rng, n_frs=args.frs, n_types=1, n_morphs=n,
                                 n_attempts=args.attempts, grid=1000)
        t0 = time.perf_counter()
        t = tensor_from_records(records)
        build = time.perf_counter() - t0
        th = ThresholdSet(random_thresholds(rng, t.frs_ids))
        best = min(_timed(lambda: gmap(t, th, with_baselines=True)) for _ in range(args.repeats))
        print(f"{n:>8} {build:>9.3f} {best:>9.4f} {gmap(t, th).gmap:>8.4f}")


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


if __name__ == "__main__":
    main()
