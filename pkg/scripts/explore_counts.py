"""Schedule counts and timing for exhaustive exploration at small sizes."""

import argparse
import time

from infinilog.cli import explore_and_check
from infinilog.harness import RunConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algo", action="append",
                    help="repeatable; default: both weak logs and two universal objects")
    ap.add_argument("--procs", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--max-steps", type=int, nargs="+", default=[None],
                    help="branching bounds to try; omit for complete enumeration")
    ap.add_argument("--limit", type=int, default=500_000)
    args = ap.parse_args()
    algos = args.algo or ["weaklog-cas", "weaklog-cons", "universal:counter", "universal:queue"]

    print(f"{'algorithm':20s} {'procs':>5s} {'bound':>6s} {'schedules':>10s} "
          f"{'truncated':>10s} {'failing':>8s} {'seconds':>8s}")
    for algo in algos:
        for procs in args.procs:
            for bound in args.max_steps:
                t0 = time.perf_counter()
                try:
                    rep = explore_and_check(RunConfig(algorithm=algo, procs=procs),
                                            max_steps=bound, limit=args.limit)
                except Exception as exc:  # limit exceeded: report and move on
                    print(f"{algo:20s} {procs:5d} {str(bound):>6s}  {exc}")
                    continue
                print(f"{algo:20s} {procs:5d} {str(bound):>6s} {rep.schedules:10d} "
                      f"{rep.truncated:10d} {rep.failing:8d} {time.perf_counter() - t0:8.2f}")


if __name__ == "__main__":
    main()
