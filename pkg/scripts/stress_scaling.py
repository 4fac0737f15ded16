"""Native stress throughput as the per-thread operation count grows.

Each append returns the whole log it saw, so total work grows quadratically
with the number of appends; this prints the measured rate and extrapolates
to a target size.
"""

import argparse

from infinilog.checkers import check_stress
from infinilog.harness import stress


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=8)
    ap.add_argument("--ops", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--target", type=int, default=10_000, help="per-thread ops to extrapolate to")
    args = ap.parse_args()

    for algo in ("weaklog-cas", "weaklog-cons"):
        for ops in args.ops:
            r = stress(algo, args.threads, ops)
            v = check_stress(r)
            elements = sum(len(op.result) for op in r.ops)
            rate = elements / r.elapsed
            n = args.threads * args.target
            projected = n * (n + 1) / 2 / rate
            print(f"{algo:13s} ops/thread={ops:6d} appends={len(r.ops):7d} "
                  f"{r.elapsed:7.2f} s  elements/s={rate:10.0f}  "
                  f"{'PASS' if v.passed else 'FAIL'}  projected@{args.target}: {projected / 60:.0f} min")


if __name__ == "__main__":
    main()
