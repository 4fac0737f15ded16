"""Deterministic execution of step-structured tasks.

Every task is a sequence of operations; every operation is a generator that
yields :class:`~infinilog.substrate.Step` objects. One scheduler slot runs
exactly one shared-memory step of one task, together with the local
computation that precedes it (arrival, invocation, allocation). Local
computation is free, so the number of slots a task uses equals the number of
memory steps it takes.

Strategies pick the next task among the enabled ones. ``explore`` enumerates
all choice sequences by stateless replay: each history is re-executed from a
fresh memory with a forced prefix of choices.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

from .substrate import DEFAULT_ALLOCATIONS_PER_STEP, NativeMemory, SimulatedMemory, Step, describe, drive, propose
from .universal import Invocation, UniversalObject, get_spec
from .values import AppendedValue
from .weaklog_cas import WeakLogCas
from .weaklog_consensus import WeakLogCons

STRATEGIES = ("random", "rr", "prompt-write", "stale-last", "exhaustive")
LOGS = ("weaklog-cons", "weaklog-cas")

# Step tags that open and close the window kept contiguous by prompt-write.
PROMPT_OPEN = {"last-read"}
PROMPT_CLOSE = {"last-write", "last-cas"}
# Step after which stale-last parks its victim.
STALE_TAG = {"weaklog-cons": "spine-propose", "weaklog-cas": "last-read"}


class ExplorationLimitExceeded(RuntimeError):
    pass


@dataclass
class Schedule:
    strategy: str = "random"
    seed: int = 0
    step_cap: int = 100_000
    stale_k: int = 1


@dataclass
class RunConfig:
    algorithm: str = "weaklog-cas"
    procs: int = 2
    ops_per_proc: int = 1
    arrivals: str = "burst"
    schedule: Schedule = field(default_factory=Schedule)
    # per-process [(op, args), ...] for universal objects; None picks a default workload
    ops: list | None = None
    # pid -> number of own steps after which the process stops for good
    crashes: dict = field(default_factory=dict)
    log: str = "weaklog-cons"
    consensus_via_cas: bool = False
    empty_retry: bool = True
    budget: int | None = DEFAULT_ALLOCATIONS_PER_STEP

    def validate(self) -> None:
        algo_kind(self.algorithm)
        if self.procs < 1 or self.ops_per_proc < 1:
            raise ValueError("need at least one process and one operation")
        if self.schedule.strategy not in STRATEGIES:
            raise ValueError(f"unknown schedule {self.schedule.strategy!r}")
        if self.log not in LOGS:
            raise ValueError(f"unknown weak log {self.log!r}")
        arrival_times(self)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> RunConfig:
        data = dict(data)
        data["schedule"] = Schedule(**data["schedule"])
        data["crashes"] = {int(k): v for k, v in data.get("crashes", {}).items()}
        return cls(**data)


def algo_kind(algorithm: str) -> str:
    if algorithm in LOGS or algorithm == "consensus":
        return algorithm
    if algorithm.startswith("universal:"):
        get_spec(algorithm.split(":", 1)[1])
        return "universal"
    raise ValueError(f"unknown algorithm {algorithm!r}")


def arrival_times(config: RunConfig) -> list[int]:
    pattern = config.arrivals
    if pattern == "burst":
        return [0] * config.procs
    kind, _, arg = pattern.partition(":")
    if kind == "staggered":
        k = int(arg)
        return [i * k for i in range(config.procs)]
    if kind == "generator":
        rng = random.Random(int(arg))
        times, t = [], 0
        for _ in range(config.procs):
            times.append(t)
            t += rng.randint(0, 8)
        return times
    raise ValueError(f"unknown arrival pattern {pattern!r}")


def default_workload(spec_name: str, procs: int, ops_per_proc: int) -> list[list[tuple]]:
    """Mutators and observers alternate so that results depend on the order."""
    work = []
    for pid in range(procs):
        ops = []
        for j in range(ops_per_proc):
            even = (pid + j) % 2 == 0
            if spec_name == "counter":
                ops.append(("inc", ()))
            elif spec_name == "queue":
                ops.append(("enq", (f"x{pid}.{j}",)) if even else ("deq", ()))
            elif spec_name == "stack":
                ops.append(("push", (f"x{pid}.{j}",)) if even else ("pop", ()))
            elif spec_name == "rwcell":
                ops.append(("write", (f"x{pid}.{j}",)) if even else ("read", ()))
            else:
                raise ValueError(f"no default workload for {spec_name!r}")
        work.append(ops)
    return work


# ---------------------------------------------------------------------------
# Task setup


@dataclass
class Task:
    pid: int
    arrival: int
    programs: list  # [(input value, () -> generator)]
    crash_after: int | None = None
    steps: int = 0
    op_index: int = 0
    arrived: bool = False
    done: bool = False
    gen: Any = None
    pending: Step | None = None


@dataclass
class Setup:
    mem: SimulatedMemory
    tasks: list[Task]
    outcome: Callable[[], dict]
    stale_tag: str


def make_log(name: str, mem, empty_retry: bool = True):
    if name == "weaklog-cons":
        return WeakLogCons(mem)
    if name == "weaklog-cas":
        return WeakLogCas(mem, empty_retry=empty_retry)
    raise ValueError(f"unknown weak log {name!r}")


class SharedConsensus:
    """Single shared consensus cell; each process proposes its own value."""

    def __init__(self, mem) -> None:
        self.cell = mem.consensus()

    def propose(self, v):
        return (yield from propose(self.cell, v, "propose"))


def build(config: RunConfig) -> Setup:
    config.validate()
    kind = algo_kind(config.algorithm)
    mem = SimulatedMemory(config.budget, config.consensus_via_cas)
    arrivals = arrival_times(config)
    tasks = []

    if kind == "universal":
        spec_name = config.algorithm.split(":", 1)[1]
        obj = UniversalObject(mem, get_spec(spec_name), make_log(config.log, mem, config.empty_retry))
        work = config.ops or default_workload(spec_name, config.procs, config.ops_per_proc)
        if len(work) != config.procs:
            raise ValueError("ops must list one workload per process")
        for pid in range(config.procs):
            progs = []
            for j, (op, args) in enumerate(work[pid]):
                inv = Invocation(op, tuple(args), f"p{pid}.{j}")
                progs.append((inv, lambda inv=inv: obj.apply(inv)))
            tasks.append(Task(pid, arrivals[pid], progs, config.crashes.get(pid)))

        def outcome() -> dict:
            return {
                "chain": [inv.describe() for inv in obj.decided_chain()],
                "announcements": obj.announcements.snapshot().to_json(),
                "help_lists": dict(obj.help_lists),
            }

        return Setup(mem, tasks, outcome, STALE_TAG[config.log])

    if kind == "consensus":
        obj = SharedConsensus(mem)
        outcome = lambda: {"decided": describe(obj.cell.peek())}
        method = obj.propose
    else:
        obj = make_log(kind, mem, config.empty_retry)
        outcome = lambda: {"snapshot": obj.snapshot().to_json()}
        method = obj.append
    for pid in range(config.procs):
        progs = []
        for j in range(config.ops_per_proc):
            v = AppendedValue(f"v{pid}.{j}")
            progs.append((v, lambda v=v: method(v)))
        tasks.append(Task(pid, arrivals[pid], progs, config.crashes.get(pid)))
    return Setup(mem, tasks, outcome, STALE_TAG.get(kind, ""))


# ---------------------------------------------------------------------------
# Strategies


class Strategy:
    def choose(self, enabled: list[Task]) -> Task:
        raise NotImplementedError

    def after_step(self, task: Task, step: Step) -> None:
        pass

    def after_respond(self, task: Task) -> None:
        pass


class RoundRobin(Strategy):
    def __init__(self) -> None:
        self.last = -1

    def choose(self, enabled):
        after = [t for t in enabled if t.pid > self.last]
        task = after[0] if after else enabled[0]
        self.last = task.pid
        return task


class SeededRandom(Strategy):
    def __init__(self, seed: int) -> None:
        self.rng = random.Random(seed)

    def choose(self, enabled):
        return enabled[self.rng.randrange(len(enabled))]


class PromptWrite(Strategy):
    """Keeps a process scheduled from its read of ``last`` to its update of ``last``."""

    def __init__(self, base: Strategy) -> None:
        self.base = base
        self.holder: int | None = None

    def choose(self, enabled):
        for t in enabled:
            if t.pid == self.holder:
                return t
        return self.base.choose(enabled)

    def after_step(self, task, step):
        if step.tag in PROMPT_OPEN:
            self.holder = task.pid
        elif step.tag in PROMPT_CLOSE and self.holder == task.pid:
            self.holder = None


class StaleLast(Strategy):
    """Parks the first process that takes a ``delay_tag`` step until ``k``
    other operations have completed, then lets it continue."""

    def __init__(self, base: Strategy, k: int, delay_tag: str) -> None:
        self.base = base
        self.k = k
        self.delay_tag = delay_tag
        self.victim: int | None = None
        self.completed_since = 0
        self.released = False
        self.released_early = False

    def choose(self, enabled):
        if self.victim is not None and not self.released:
            if self.completed_since >= self.k:
                self.released = True
            else:
                others = [t for t in enabled if t.pid != self.victim]
                if others:
                    return self.base.choose(others)
                self.released = self.released_early = True
        return self.base.choose(enabled)

    def after_step(self, task, step):
        if self.victim is None and step.tag == self.delay_tag:
            self.victim = task.pid

    def after_respond(self, task):
        if self.victim is not None and task.pid != self.victim and not self.released:
            self.completed_since += 1


class Scripted(Strategy):
    """Follows a fixed script, then falls back to the lowest enabled pid.

    Script items are a pid (one step of that process) or ``("finish", pid)``
    (steps of that process until its current operation responds).
    """

    def __init__(self, script) -> None:
        self.script = list(script)
        self.finishing: int | None = None

    def choose(self, enabled):
        by_pid = {t.pid: t for t in enabled}
        if self.finishing is None and self.script:
            item = self.script.pop(0)
            if isinstance(item, tuple):
                self.finishing = item[1]
            else:
                if item not in by_pid:
                    raise ValueError(f"scripted pid {item} is not enabled")
                return by_pid[item]
        if self.finishing is not None:
            if self.finishing not in by_pid:
                raise ValueError(f"scripted pid {self.finishing} is not enabled")
            return by_pid[self.finishing]
        return enabled[0]

    def after_respond(self, task):
        if task.pid == self.finishing:
            self.finishing = None


def make_strategy(schedule: Schedule, stale_tag: str) -> Strategy:
    base = SeededRandom(schedule.seed)
    if schedule.strategy == "random":
        return base
    if schedule.strategy == "rr":
        return RoundRobin()
    if schedule.strategy == "prompt-write":
        return PromptWrite(base)
    if schedule.strategy == "stale-last":
        if not stale_tag:
            raise ValueError("stale-last needs a weak-log based algorithm")
        return StaleLast(base, schedule.stale_k, stale_tag)
    raise ValueError(f"strategy {schedule.strategy!r} is not a single-run strategy")


# ---------------------------------------------------------------------------
# History


@dataclass
class History:
    config: dict
    events: list[dict]
    outcome: dict

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "events": self.events,
                           "outcome": self.outcome}, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> History:
        data = json.loads(text)
        return cls(data["config"], data["events"], data["outcome"])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> History:
        with open(path) as fh:
            return cls.from_json(fh.read())

    def of_kind(self, kind: str) -> list[dict]:
        return [e for e in self.events if e["kind"] == kind]

    @property
    def status(self) -> str:
        return self.outcome["status"]


class _Recorder:
    def __init__(self) -> None:
        self.events: list[dict] = []

    def emit(self, pid, kind, cell=None, op=None, inp=None, out=None, tag=None) -> None:
        self.events.append({"i": len(self.events), "pid": pid, "kind": kind, "cell": cell,
                            "op": op, "in": inp, "out": out, "tag": tag})


def execute(setup: Setup, strategy: Strategy, step_cap: int, config: dict) -> History:
    rec = _Recorder()
    mem = setup.mem
    tasks = setup.tasks
    status = "ok"
    clock = 0
    executed = 0

    def finish(task: Task, how: str, detail: Any = None) -> None:
        nonlocal status
        task.done = True
        if how == "crash":
            rec.emit(task.pid, "crash")
        elif how == "failure":
            rec.emit(task.pid, "failure", out=detail)
            status = "failure"

    def advance(task: Task, value: Any) -> None:
        # run local computation up to the next step, starting new operations as needed
        while True:
            mem.begin_local()
            try:
                if task.gen is None:
                    inp, factory = task.programs[task.op_index]
                    rec.emit(task.pid, "invoke", inp=describe(inp))
                    task.gen = factory()
                    task.pending = task.gen.send(None)
                else:
                    task.pending = task.gen.send(value)
                return
            except StopIteration as stop:
                rec.emit(task.pid, "respond", out=describe(stop.value))
                strategy.after_respond(task)
                task.gen, task.pending, value = None, None, None
                task.op_index += 1
                if task.op_index == len(task.programs):
                    task.done = True
                    return
            except Exception as exc:  # structural errors surface as failure events
                finish(task, "failure", f"{type(exc).__name__}: {exc}")
                return
            finally:
                mem.end_local()

    for t in tasks:
        if t.crash_after == 0:
            finish(t, "crash")

    while True:
        live = [t for t in tasks if not t.done]
        if not live:
            break
        if executed >= step_cap:
            status = "step-cap" if status == "ok" else status
            for t in live:
                finish(t, "crash")
            break
        enabled = [t for t in live if t.arrival <= clock]
        if not enabled:
            clock = min(t.arrival for t in live)
            continue
        task = strategy.choose(enabled)
        if not task.arrived:
            task.arrived = True
            rec.emit(task.pid, "arrive")
            advance(task, None)
            if task.done:
                clock += 1
                continue
        step = task.pending
        out = step.execute()
        rec.emit(task.pid, "mem-step", step.cell.cid, step.op, describe(list(step.args)),
                 describe(out), step.tag)
        task.steps += 1
        executed += 1
        clock += 1
        strategy.after_step(task, step)
        advance(task, out)
        if not task.done and task.crash_after is not None and task.steps >= task.crash_after:
            finish(task, "crash")

    outcome = {"status": status, "steps": executed}
    outcome.update(setup.outcome())
    return History(config, rec.events, outcome)


def run(config: RunConfig, strategy: Strategy | None = None) -> History:
    setup = build(config)
    if strategy is None:
        strategy = make_strategy(config.schedule, setup.stale_tag)
    history = execute(setup, strategy, config.schedule.step_cap, config.to_json())
    if isinstance(strategy, StaleLast):
        history.outcome["stale"] = {"victim": strategy.victim, "released_early": strategy.released_early}
    return history


# ---------------------------------------------------------------------------
# Exhaustive exploration


class _Replay(Strategy):
    def __init__(self, prefix: list[int], branch_depth: int | None) -> None:
        self.prefix = prefix
        self.branch_depth = branch_depth
        self.trace: list[tuple[int, int]] = []

    def choose(self, enabled):
        d = len(self.trace)
        pick = self.prefix[d] if d < len(self.prefix) else 0
        if self.branch_depth is not None and d >= self.branch_depth:
            self.trace.append((0, 1))
        else:
            self.trace.append((pick, len(enabled)))
        return enabled[pick]


@dataclass
class ExploreStats:
    histories: int = 0
    truncated: int = 0


def explore(config: RunConfig | Callable[[], Setup], max_steps: int | None = None,
            limit: int = 1_000_000, stats: ExploreStats | None = None,
            step_cap: int = 100_000) -> Iterator[History]:
    """Yield one history per distinct schedule.

    ``config`` is a run configuration or a zero-argument factory returning a
    fresh :class:`Setup`. Every choice among enabled tasks is branched on for
    the first ``max_steps`` scheduling decisions; later decisions follow the
    lowest enabled pid. When every run finishes within ``max_steps`` steps
    the enumeration is complete. Runs that go beyond are counted in
    ``stats.truncated``.
    """
    stats = stats if stats is not None else ExploreStats()
    if callable(config):
        factory, cfg = config, {"algorithm": "custom"}
    else:
        factory, cfg = (lambda: build(config)), config.to_json()
        step_cap = config.schedule.step_cap
    prefix: list[int] = []
    while True:
        if stats.histories >= limit:
            raise ExplorationLimitExceeded(f"more than {limit} schedules")
        strategy = _Replay(prefix, max_steps)
        history = execute(factory(), strategy, step_cap, cfg)
        stats.histories += 1
        if max_steps is not None and len(strategy.trace) > max_steps:
            stats.truncated += 1
        yield history
        trace = strategy.trace
        d = len(trace) - 1
        while d >= 0 and trace[d][0] + 1 >= trace[d][1]:
            d -= 1
        if d < 0:
            return
        prefix = [c for c, _ in trace[:d]] + [trace[d][0] + 1]


# ---------------------------------------------------------------------------
# Native stress


@dataclass
class StressOp:
    thread: int
    token: str
    invoke: int
    respond: int
    result: Any


@dataclass
class StressResult:
    algorithm: str
    threads: int
    ops: list[StressOp]
    elapsed: float
    finished: bool
    chain: list | None = None
    inputs: dict = field(default_factory=dict)

    @property
    def throughput(self) -> float:
        return len(self.ops) / self.elapsed if self.elapsed else float("inf")


def stress(algorithm: str, threads: int, ops: int, duration: float | None = None,
           log: str = "weaklog-cons", consensus_via_cas: bool = False) -> StressResult:
    """Run ``threads`` real threads, each doing ``ops`` operations on one shared object.

    Sequences are stored as token tuples. ``duration`` stops threads between
    operations once exceeded; ``finished`` reports whether all operations ran.
    """
    kind = algo_kind(algorithm)
    mem = NativeMemory(consensus_via_cas)
    tickets = itertools.count()
    ticket_lock = threading.Lock()
    inputs: dict[str, Any] = {}

    def next_ticket() -> int:
        with ticket_lock:
            return next(tickets)

    if kind == "universal":
        spec_name = algorithm.split(":", 1)[1]
        obj = UniversalObject(mem, get_spec(spec_name), make_log(log, mem))
        work = default_workload(spec_name, threads, ops)

        def program(tid: int, j: int):
            op, args = work[tid][j]
            inv = Invocation(op, args, f"t{tid}.{j}")
            inputs[inv.token] = inv
            return inv.token, obj.apply(inv), lambda r: r
    elif kind in LOGS:
        obj = make_log(kind, mem)

        def program(tid: int, j: int):
            v = AppendedValue(f"t{tid}.{j}")
            return v.token, obj.append(v), lambda seq: tuple(x.token for x in seq)
    else:
        raise ValueError(f"stress does not support {algorithm!r}")

    per_thread: list[list[StressOp]] = [[] for _ in range(threads)]
    deadline = None if duration is None else time.monotonic() + duration
    start_gate = threading.Barrier(threads)

    def worker(tid: int) -> None:
        start_gate.wait()
        out = per_thread[tid]
        for j in range(ops):
            if deadline is not None and time.monotonic() > deadline:
                return
            token, gen, convert = program(tid, j)
            t0 = next_ticket()
            result = drive(gen)
            out.append(StressOp(tid, token, t0, next_ticket(), convert(result)))

    started = time.monotonic()
    pool = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(threads)]
    for th in pool:
        th.start()
    for th in pool:
        th.join()
    elapsed = time.monotonic() - started
    done = [op for ops_ in per_thread for op in ops_]
    chain = obj.decided_chain() if kind == "universal" else None
    return StressResult(algorithm, threads, done, elapsed, len(done) == threads * ops, chain, inputs)
