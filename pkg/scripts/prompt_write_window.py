"""Visibility misses of the consensus log under two prompt-write windows.

The wide window keeps a process scheduled from its read of ``last`` through
its write of ``last``; the narrow one only from its spine propose to the
write. Under the narrow window a process can read ``last``, stall, and later
move ``last`` backward, so misses can reappear.
"""

import argparse

from infinilog.checkers import WeakLogRunRecord, check_weak_log, last_movement
from infinilog.harness import PromptWrite, RunConfig, Schedule, SeededRandom, run


class NarrowPromptWrite(PromptWrite):
    def after_step(self, task, step):
        if step.tag == "spine-propose":
            self.holder = task.pid
        elif step.tag == "last-write" and self.holder == task.pid:
            self.holder = None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--procs", type=int, default=24)
    ap.add_argument("--runs", type=int, default=300)
    ap.add_argument("--arrivals", default="burst")
    args = ap.parse_args()

    for name, make in (("wide", PromptWrite), ("narrow", NarrowPromptWrite)):
        runs_with_misses = misses = backward = 0
        for seed in range(args.runs):
            cfg = RunConfig(algorithm="weaklog-cons", procs=args.procs, arrivals=args.arrivals,
                            schedule=Schedule("prompt-write", seed=seed))
            h = run(cfg, make(SeededRandom(seed)))
            m = check_weak_log(WeakLogRunRecord.from_history(h)).counters["visibility_misses"]
            misses += m
            runs_with_misses += m > 0
            backward += last_movement(h)["last_backward"]
        print(f"{name:7s} runs={args.runs} runs_with_misses={runs_with_misses} "
              f"misses={misses} backward_moves_of_last={backward}")


if __name__ == "__main__":
    main()
