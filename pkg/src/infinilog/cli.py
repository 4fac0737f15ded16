"""Command-line entry point: ``infinilog {simulate,explore,stress,check}``.

Exit status is 0 exactly when every requested check passes. Simulated
commands print a ``config:`` line that reproduces the run.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from .checkers import Verdict, check_history, check_stress
from .harness import (
    LOGS, STRATEGIES, ExplorationLimitExceeded, ExploreStats, History, RunConfig, Schedule,
    algo_kind, explore, run, stress,
)

SEED_ENV = "INFINILOG_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}")


def algorithm(text: str) -> str:
    try:
        algo_kind(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return text


def arrivals(text: str) -> str:
    try:
        RunConfig(arrivals=text).validate()
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"bad arrival pattern {text!r}")
    return text


def positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


@dataclass
class ExploreReport:
    """Aggregate over every history of an exploration."""

    schedules: int = 0
    truncated: int = 0
    failing: int = 0
    first_failure: dict | None = None
    counters: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failing == 0

    def add(self, history: History, verdict: Verdict) -> None:
        self.schedules += 1
        if not verdict.passed and self.first_failure is None:
            self.first_failure = {
                "schedule": [e["pid"] for e in history.events if e["kind"] == "mem-step"],
                "failures": verdict.failures(),
            }
        self.failing += not verdict.passed
        for name, value in verdict.counters.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                continue
            if name.startswith("max_") or name in ("step_bound",):
                self.counters[name] = max(self.counters.get(name, value), value)
            else:
                self.counters[name] = self.counters.get(name, 0) + value

    def to_json(self) -> dict:
        return {"schedules": self.schedules, "truncated": self.truncated,
                "failing": self.failing, "first_failure": self.first_failure,
                "counters": self.counters, "status": "pass" if self.passed else "fail"}


def explore_and_check(config: RunConfig, max_steps: int | None = None,
                      limit: int = 1_000_000) -> ExploreReport:
    report = ExploreReport()
    stats = ExploreStats()
    for h in explore(config, max_steps=max_steps, limit=limit, stats=stats):
        report.add(h, check_history(h))
    report.truncated = stats.truncated
    return report


def _write_json(path: str, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def cmd_simulate(args) -> int:
    config = RunConfig(algorithm=args.algo, procs=args.procs, ops_per_proc=args.ops_per_proc,
                       arrivals=args.arrivals, log=args.log,
                       schedule=Schedule(args.schedule, seed=args.seed, step_cap=args.step_cap,
                                         stale_k=args.stale_k))
    config.validate()
    print("config: " + json.dumps(config.to_json(), separators=(",", ":")))
    history = run(config)
    verdict = check_history(history)
    for e in history.of_kind("respond"):
        print(f"p{e['pid']} -> {json.dumps(e['out'])}")
    print(f"status: {history.status}, steps: {history.outcome['steps']}")
    print(verdict.summary())
    if args.out:
        history.save(args.out)
        _write_json(args.out + ".verdict.json", verdict.to_json())
    print("PASS" if verdict.passed else "FAIL")
    return 0 if verdict.passed else 1


def cmd_explore(args) -> int:
    config = RunConfig(algorithm=args.algo, procs=args.procs, log=args.log)
    config.validate()
    print("config: " + json.dumps(config.to_json(), separators=(",", ":")))
    try:
        report = explore_and_check(config, args.max_steps, args.limit)
    except ExplorationLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"schedules: {report.schedules}")
    if args.max_steps is not None:
        print(f"branching bounded to the first {args.max_steps} decisions "
              f"({report.truncated} schedules hit the bound)")
    for name, value in report.counters.items():
        print(f"{name:28s} {value}")
    if report.first_failure:
        print("first counterexample: " + json.dumps(report.first_failure))
    if args.out:
        _write_json(args.out, report.to_json())
    print("PASS" if report.passed else f"FAIL ({report.failing} failing schedules)")
    return 0 if report.passed else 1


def cmd_stress(args) -> int:
    kind = algo_kind(args.algo)
    if kind not in LOGS and kind != "universal":
        raise SystemExit(f"stress does not support {args.algo!r}")
    result = stress(args.algo, args.threads, args.ops, duration=args.duration, log=args.log)
    verdict = check_stress(result, seed=args.seed)
    print(verdict.summary())
    if args.out:
        _write_json(args.out, verdict.to_json())
    if not verdict.passed:
        print("witnesses: " + json.dumps(verdict.failures()))
    print("PASS" if verdict.passed else "FAIL")
    return 0 if verdict.passed else 1


def cmd_check(args) -> int:
    history = History.load(args.history)
    verdict = check_history(history)
    print(verdict.summary())
    if args.out:
        _write_json(args.out, verdict.to_json())
    print("PASS" if verdict.passed else "FAIL")
    return 0 if verdict.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infinilog", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="one seeded simulated execution")
    sim.add_argument("--algo", type=algorithm, default="weaklog-cas")
    sim.add_argument("--procs", type=positive, default=2)
    sim.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    sim.add_argument("--schedule", choices=[s for s in STRATEGIES if s != "exhaustive"],
                     default="random")
    sim.add_argument("--arrivals", type=arrivals, default="burst")
    sim.add_argument("--step-cap", type=positive, default=100_000)
    sim.add_argument("--out", help="History JSON path; the verdict goes to <out>.verdict.json")
    sim.add_argument("--ops-per-proc", type=positive, default=1)
    sim.add_argument("--stale-k", type=positive, default=1)
    sim.add_argument("--log", choices=LOGS, default="weaklog-cons",
                     help="weak log under a universal object")
    sim.set_defaults(func=cmd_simulate)

    exp = sub.add_parser("explore", help="every interleaving of a small configuration")
    exp.add_argument("--algo", type=algorithm, default="weaklog-cas")
    exp.add_argument("--procs", type=positive, default=2)
    exp.add_argument("--max-steps", type=positive, default=None,
                     help="branch only on the first M scheduling decisions")
    exp.add_argument("--limit", type=positive, default=1_000_000)
    exp.add_argument("--log", choices=LOGS, default="weaklog-cons")
    exp.add_argument("--out", help="aggregate report JSON path")
    exp.set_defaults(func=cmd_explore)

    st = sub.add_parser("stress", help="real threads on native cells")
    st.add_argument("--algo", type=algorithm, default="weaklog-cas")
    st.add_argument("--threads", type=positive, default=4)
    st.add_argument("--ops", type=positive, default=1000)
    st.add_argument("--duration", type=float, default=None, help="seconds before threads stop")
    st.add_argument("--log", choices=LOGS, default="weaklog-cons")
    st.add_argument("--seed", type=int, default=None, help="window sampling seed")
    st.add_argument("--out", help="Verdict JSON path")
    st.set_defaults(func=cmd_stress)

    chk = sub.add_parser("check", help="re-check a saved History")
    chk.add_argument("history")
    chk.add_argument("--out", help="Verdict JSON path")
    chk.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", 0) is None:
        args.seed = default_seed()
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
