"""Visibility misses per schedule family and process count, for both weak logs."""

import argparse
import statistics

from infinilog.checkers import WeakLogRunRecord, check_weak_log
from infinilog.harness import RunConfig, Schedule, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--procs", type=int, nargs="+", default=[4, 8, 16, 32])
    ap.add_argument("--arrivals", default="staggered:1")
    args = ap.parse_args()

    print(f"{'log':13s} {'schedule':12s} {'procs':>5s} {'mean misses':>11s} "
          f"{'max/value':>9s} {'runs w/ miss':>12s}")
    for algo in ("weaklog-cons", "weaklog-cas"):
        for strategy in ("random", "prompt-write", "stale-last", "rr"):
            for n in args.procs:
                misses, worst, hit = [], 0, 0
                for seed in range(args.runs):
                    h = run(RunConfig(algorithm=algo, procs=n, arrivals=args.arrivals,
                                      schedule=Schedule(strategy, seed=seed, stale_k=2)))
                    c = check_weak_log(WeakLogRunRecord.from_history(h)).counters
                    misses.append(c["visibility_misses"])
                    worst = max(worst, c["max_misses_per_value"])
                    hit += c["visibility_misses"] > 0
                print(f"{algo:13s} {strategy:12s} {n:5d} {statistics.mean(misses):11.2f} "
                      f"{worst:9d} {hit:12d}")


if __name__ == "__main__":
    main()
