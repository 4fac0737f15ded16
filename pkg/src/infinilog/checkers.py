"""Checks over recorded executions.

All functions here are pure: they read a :class:`~infinilog.harness.History`
(or records extracted from one) and return a :class:`Verdict`.

Eventual visibility is reported as miss counts: a miss for value ``v`` is a
completed append that was invoked after ``v``'s append responded and whose
sequence lacks ``v``. Two schedule families have zero misses and the tests
assert it:

* consensus log under prompt-write. ``last`` is read, proposed on and
  written with no other step in between, so the cell read from ``last`` is
  always the undecided spine tail, every append wins its spine consensus and
  ``last`` only moves forward. An append invoked after ``v`` responded
  therefore lands in a list after ``v``'s, and its collect walks through
  ``v``.
* CAS log with non-overlapping appends. Each append pushes on top of the
  chain left by the previous ones and reads the whole chain below it.
"""

from __future__ import annotations

import bisect
import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .universal import Invocation, SequentialSpec, get_spec
from .values import StructuralCorruption
from .weaklog_cas import ChainSnapshot
from .weaklog_consensus import SpineSnapshot

PASS, FAIL, NA = "pass", "fail", "n/a"
MAX_LINEARIZABLE_OPS = 10


class MalformedRecord(ValueError):
    pass


@dataclass
class PropertyResult:
    status: str
    witness: Any = None

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class Verdict:
    properties: dict[str, PropertyResult] = field(default_factory=dict)
    counters: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(p.status != FAIL for p in self.properties.values())

    def status(self, name: str) -> str:
        return self.properties[name].status

    def set(self, name: str, witness: Any = None, ok: bool | None = None) -> None:
        if ok is None:
            ok = witness is None
        self.properties[name] = PropertyResult(PASS if ok else FAIL, witness)

    def merge(self, other: Verdict, prefix: str = "") -> Verdict:
        for k, v in other.properties.items():
            self.properties[prefix + k] = v
        for k, v in other.counters.items():
            self.counters[prefix + k] = v
        return self

    def failures(self) -> dict[str, Any]:
        return {k: v.witness for k, v in self.properties.items() if v.status == FAIL}

    def to_json(self) -> dict:
        return {"properties": {k: v.to_json() for k, v in self.properties.items()},
                "counters": dict(self.counters)}

    def summary(self) -> str:
        lines = [f"{name:28s} {res.status.upper()}"
                 + (f"  witness={res.witness}" if res.status == FAIL else "")
                 for name, res in self.properties.items()]
        lines += [f"{name:28s} {value}" for name, value in self.counters.items()
                  if not isinstance(value, (dict, list))]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Weak log records


@dataclass
class OpRecord:
    pid: int
    token: str
    sequence: list[str] | None
    invoke: int
    respond: int | None

    @property
    def completed(self) -> bool:
        return self.respond is not None


@dataclass
class WeakLogRunRecord:
    ops: list[OpRecord]
    snapshot: SpineSnapshot | ChainSnapshot | None = None

    @classmethod
    def from_history(cls, history) -> WeakLogRunRecord:
        ops, open_ops = [], {}
        for e in history.events:
            if e["kind"] == "invoke":
                if not isinstance(e["in"], str):
                    raise MalformedRecord(f"event {e['i']}: weak-log invoke needs a token")
                rec = OpRecord(e["pid"], e["in"], None, e["i"], None)
                open_ops[e["pid"]] = rec
                ops.append(rec)
            elif e["kind"] == "respond":
                rec = open_ops.pop(e["pid"], None)
                if rec is None:
                    raise MalformedRecord(f"event {e['i']}: respond without invoke")
                rec.sequence, rec.respond = list(e["out"]), e["i"]
        snap = history.outcome.get("snapshot")
        return cls(ops, snapshot_from_json(snap) if snap else None)

    @classmethod
    def from_sequences(cls, pairs: Iterable[tuple[str, list[str] | None]]) -> WeakLogRunRecord:
        """Record from (token, returned sequence) pairs in invocation order."""
        ops = []
        for i, (token, seq) in enumerate(pairs):
            ops.append(OpRecord(i, token, None if seq is None else list(seq), 2 * i,
                                None if seq is None else 2 * i + 1))
        return cls(ops)


def snapshot_from_json(data: dict):
    if data["kind"] == "spine":
        return SpineSnapshot.from_json(data)
    if data["kind"] == "chain":
        return ChainSnapshot.from_json(data)
    raise MalformedRecord(f"unknown snapshot kind {data['kind']!r}")


def precedence_order(snapshot) -> list[str]:
    """Total order of appended values: spine order outer, side-chain order
    inner for the consensus log; oldest first along the chain for the CAS log."""
    if isinstance(snapshot, dict):
        snapshot = snapshot_from_json(snapshot)
    if isinstance(snapshot, SpineSnapshot):
        order = [t for l in snapshot.lists for t in l.values]
        cells = [l.cell for l in snapshot.lists]
        if len(set(cells)) != len(cells):
            raise StructuralCorruption("spine visits a cell twice")
    else:
        order = list(reversed(snapshot.nodes))
    if len(set(order)) != len(order):
        raise StructuralCorruption("a value occurs twice in the structure")
    return order


def _inversion(wi: list[str], wj: list[str]) -> tuple[str, str] | None:
    pos_j = {t: k for k, t in enumerate(wj)}
    prev = None
    for t in wi:
        if t in pos_j:
            if prev is not None and pos_j[t] < pos_j[prev]:
                return prev, t
            prev = t
    return None


def _has_global_order(seqs: list[list[str]]) -> bool:
    """True when the union of consecutive-pair constraints is acyclic."""
    succ = defaultdict(set)
    indeg = defaultdict(int)
    nodes = set()
    for w in seqs:
        nodes.update(w)
        for a, b in zip(w, w[1:]):
            if b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    ready = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return seen == len(nodes)


def total_order_witness(seqs: list[tuple[str, list[str]]]) -> dict | None:
    """First pair of values ordered differently by two sequences, or None.

    An acyclic precedence graph rules out any inversion, so the quadratic
    pairwise scan only runs when the fast test fails.
    """
    if _has_global_order([w for _, w in seqs]):
        return None
    for (ti, wi), (tj, wj) in itertools.combinations(seqs, 2):
        inv = _inversion(wi, wj)
        if inv is not None:
            return {"sequences": [ti, tj], "pair": list(inv)}
    return None


def check_weak_log(record: WeakLogRunRecord) -> Verdict:
    verdict = Verdict()
    appended = {op.token for op in record.ops}
    if len(appended) != len(record.ops):
        raise MalformedRecord("a token was appended twice")
    done = [op for op in record.ops if op.completed]
    for op in done:
        if op.sequence is None:
            raise MalformedRecord(f"{op.token} responded without a sequence")

    bad = next(((op.token, t) for op in done for t in op.sequence if t not in appended), None)
    verdict.set("validity", None if bad is None else {"sequence": bad[0], "value": bad[1]})

    bad = next((op for op in done if not op.sequence or op.sequence[-1] != op.token), None)
    verdict.set("suffixing", None if bad is None else
                {"sequence": bad.token, "last": bad.sequence[-1] if bad.sequence else None})

    dupes = next((op.token for op in done if len(set(op.sequence)) != len(op.sequence)), None)
    witness = total_order_witness([(op.token, op.sequence) for op in done])
    if dupes is not None and witness is None:
        witness = {"sequences": [dupes], "pair": "repeated value"}
    verdict.set("total-order", witness)

    if record.snapshot is not None:
        order = precedence_order(record.snapshot)
        pos = {t: k for k, t in enumerate(order)}
        bad = None
        for op in done:
            idx = [pos.get(t, -1) for t in op.sequence]
            if -1 in idx or any(a >= b for a, b in zip(idx, idx[1:])):
                bad = op.token
                break
        verdict.set("precedence-subsequence", None if bad is None else {"sequence": bad})
    else:
        verdict.properties["precedence-subsequence"] = PropertyResult(NA)

    # misses[v] = (appends invoked after v responded) - (those containing v)
    responded = {op.token: op.respond for op in done}
    invokes = sorted(op.invoke for op in done)
    seen_later: dict[str, int] = defaultdict(int)
    for op in done:
        for t in op.sequence:
            r = responded.get(t)
            if r is not None and op.invoke > r:
                seen_later[t] += 1
    misses = {v.token: len(invokes) - bisect.bisect_right(invokes, v.respond) - seen_later[v.token]
              for v in done}
    verdict.counters["visibility_misses"] = sum(misses.values())
    verdict.counters["max_misses_per_value"] = max(misses.values(), default=0)
    verdict.counters["misses_per_value"] = {k: m for k, m in misses.items() if m}
    verdict.counters["completed"] = len(done)
    verdict.counters["crashed"] = len(record.ops) - len(done)
    return verdict


# ---------------------------------------------------------------------------
# Linearizability


@dataclass
class Operation:
    token: str
    invocation: Invocation
    invoke: int
    respond: int | None = None
    result: Any = None

    @property
    def completed(self) -> bool:
        return self.respond is not None


def operations_from_history(history) -> list[Operation]:
    ops, open_ops = [], {}
    for e in history.events:
        if e["kind"] == "invoke":
            inv = Invocation.from_json(e["in"])
            op = Operation(inv.token, inv, e["i"])
            open_ops[e["pid"]] = op
            ops.append(op)
        elif e["kind"] == "respond":
            op = open_ops.pop(e["pid"])
            op.respond, op.result = e["i"], e["out"]
    return ops


def _normalize(x: Any) -> Any:
    # JSON turns tuples into lists
    return tuple(_normalize(y) for y in x) if isinstance(x, (list, tuple)) else x


def _same_result(a: Any, b: Any) -> bool:
    return _normalize(a) == _normalize(b)


def check_linearizable(ops: list[Operation], spec: SequentialSpec | str,
                       initial_state: Any = None, max_ops: int = MAX_LINEARIZABLE_OPS) -> Verdict:
    """Exhaustive witness search with memoization on (placed ops, state).

    Completed operations must all be placed; incomplete ones may be placed or
    dropped. An operation can be placed next only if it was invoked before
    every unplaced completed operation responded.
    """
    if isinstance(spec, str):
        spec = get_spec(spec)
    if len(ops) > max_ops:
        raise ValueError(f"{len(ops)} operations exceed the search bound {max_ops}")
    state0 = spec.initial_state if initial_state is None else initial_state
    n = len(ops)
    inf = float("inf")
    respond = [op.respond if op.completed else inf for op in ops]
    complete_mask = sum(1 << i for i, op in enumerate(ops) if op.completed)
    failed: set = set()
    best: list[int] = []

    def search(mask: int, state: Any, path: list[int]) -> list[int] | None:
        nonlocal best
        if mask & complete_mask == complete_mask:
            return path
        key = (mask, state)
        if key in failed:
            return None
        if len(path) > len(best):
            best = list(path)
        horizon = min(respond[i] for i in range(n) if not mask >> i & 1)
        for i in range(n):
            if mask >> i & 1 or ops[i].invoke > horizon:
                continue
            new_state, res = spec.transition(state, ops[i].invocation)
            if ops[i].completed and not _same_result(res, ops[i].result):
                continue
            found = search(mask | 1 << i, new_state, path + [i])
            if found is not None:
                return found
        failed.add(key)
        return None

    verdict = Verdict()
    order = search(0, state0, [])
    verdict.counters["operations"] = n
    verdict.counters["memo_entries"] = len(failed)
    if order is None:
        placed = {ops[i].token for i in best}
        verdict.set("linearizable", {
            "longest_prefix": [ops[i].token for i in best],
            "unplaceable": [op.token for op in ops if op.completed and op.token not in placed],
        })
    else:
        verdict.set("linearizable", ok=True)
        verdict.properties["linearizable"].witness = [ops[i].token for i in order]
    return verdict


def validate_witness(ops: list[Operation], spec: SequentialSpec | str, order: list[str],
                     initial_state: Any = None) -> str | None:
    """None when ``order`` is a valid linearization of ``ops``, else the reason."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    by_token = {op.token: op for op in ops}
    if len(set(order)) != len(order):
        return "witness repeats an operation"
    missing = [op.token for op in ops if op.completed and op.token not in order]
    if missing:
        return f"completed operations missing from witness: {missing}"
    unknown = [t for t in order if t not in by_token]
    if unknown:
        return f"witness names unknown operations: {unknown}"
    # real time: no later op in the order may respond before an earlier one was invoked
    earliest_respond = float("inf")
    for t in reversed(order):
        op = by_token[t]
        if earliest_respond < op.invoke:
            return f"{t} placed after an operation that responded before {t} was invoked"
        if op.completed:
            earliest_respond = min(earliest_respond, op.respond)
    state = spec.initial_state if initial_state is None else initial_state
    for t in order:
        op = by_token[t]
        state, res = spec.transition(state, op.invocation)
        if op.completed and not _same_result(res, op.result):
            return f"{t} returned {op.result!r}, replay gives {res!r}"
    return None


def check_universal(history, spec: SequentialSpec | str | None = None,
                    max_ops: int = MAX_LINEARIZABLE_OPS) -> Verdict:
    """Linearizability, chain witness, token uniqueness and helping for one run."""
    if spec is None:
        spec = history.config["algorithm"].split(":", 1)[1]
    if isinstance(spec, str):
        spec = get_spec(spec)
    ops = operations_from_history(history)
    verdict = Verdict()
    chain = [inv["token"] for inv in history.outcome["chain"]]

    dup = next((t for t, c in _counts(chain).items() if c > 1), None)
    verdict.set("token-uniqueness", None if dup is None else {"token": dup})

    if len(ops) <= max_ops:
        verdict.merge(check_linearizable(ops, spec, max_ops=max_ops))
    else:
        verdict.properties["linearizable"] = PropertyResult(NA)

    reason = validate_witness(ops, spec, chain)
    verdict.set("chain-witness", reason)

    # every announced invocation an operation saw is decided in a cell it visited
    seen_by: dict[int, list[str]] = defaultdict(list)
    current: dict[int, str] = {}
    for e in history.events:
        if e["kind"] == "invoke":
            current[e["pid"]] = e["in"]["token"]
        elif e["kind"] == "mem-step" and e["tag"] == "ops-propose":
            seen_by[current[e["pid"]]].append(e["out"]["invocation"]["token"])
    helped = None
    for op in ops:
        if op.completed:
            help_list = history.outcome.get("help_lists", {}).get(op.token, [])
            lost = set(help_list) - set(seen_by.get(op.token, []))
            if lost:
                helped = {"operation": op.token, "undecided": sorted(lost)}
                break
    verdict.set("helping", helped)
    verdict.counters["chain_length"] = len(chain)
    return verdict


def _counts(items) -> dict:
    out: dict = defaultdict(int)
    for x in items:
        out[x] += 1
    return out


# ---------------------------------------------------------------------------
# Progress and step accounting


def default_bound(arrived: int, inserted: int) -> int:
    # generous: weak-log walk plus one chain cell per inserted invocation
    return 8 + 2 * arrived + 4 * inserted


@dataclass
class _OpSteps:
    pid: int
    token: str
    invoke: int
    respond: int | None = None
    steps: list = field(default_factory=list)


def _op_steps(history) -> list[_OpSteps]:
    ops, open_ops = [], {}
    for e in history.events:
        kind = e["kind"]
        if kind == "invoke":
            token = e["in"]["token"] if isinstance(e["in"], dict) else e["in"]
            op = _OpSteps(e["pid"], token, e["i"])
            open_ops[e["pid"]] = op
            ops.append(op)
        elif kind == "mem-step":
            open_ops[e["pid"]].steps.append(e)
        elif kind == "respond":
            open_ops.pop(e["pid"]).respond = e["i"]
        elif kind in ("crash", "failure"):
            open_ops.pop(e["pid"], None)
    return ops


def check_progress(history, bound: Callable[[int, int], int] | None = None) -> Verdict:
    bound = bound or default_bound
    verdict = Verdict()
    ops = _op_steps(history)
    arrived = len(history.of_kind("arrive"))
    inserted = len(ops)
    done = [op for op in ops if op.respond is not None]
    limit = bound(arrived, inserted)

    over = next((op for op in done if len(op.steps) > limit), None)
    verdict.set("step-bound", None if over is None else
                {"operation": over.token, "steps": len(over.steps), "bound": limit})
    verdict.counters["max_steps_per_op"] = max((len(op.steps) for op in done), default=0)
    verdict.counters["step_bound"] = limit

    tags = {e["tag"] for op in ops for e in op.steps}
    if "spine-propose" in tags:
        _side_propose_accounting(ops, verdict)
    if "last-cas" in tags:
        _failed_cas_accounting(history, ops, verdict)
    return verdict


def _side_propose_accounting(ops: list[_OpSteps], verdict: Verdict) -> None:
    readers: dict[str, int] = defaultdict(int)
    first_read: dict[str, str] = {}
    for op in ops:
        reads = [e for e in op.steps if e["tag"] == "last-read"]
        if reads:
            first_read[op.token] = reads[0]["out"]
            readers[reads[0]["out"]] += 1
    worst, max_side = None, 0
    for op in ops:
        if op.respond is None or op.token not in first_read:
            continue
        side = sum(1 for e in op.steps if e["tag"] == "side-propose")
        max_side = max(max_side, side)
        if side > readers[first_read[op.token]] and worst is None:
            worst = {"operation": op.token, "side_proposes": side,
                     "same_last_readers": readers[first_read[op.token]]}
    verdict.set("side-propose-accounting", worst)
    verdict.counters["max_side_proposes"] = max_side
    verdict.counters["max_same_last_readers"] = max(readers.values(), default=0)


def _failed_cas_accounting(history, ops: list[_OpSteps], verdict: Verdict) -> None:
    successes: dict[str, list[tuple[int, int]]] = defaultdict(list)
    for e in history.events:
        if e["kind"] == "mem-step" and e["op"] == "cas" and e["out"] is True:
            successes[e["cell"]].append((e["i"], e["pid"]))
    intervals = [(op.invoke, op.respond if op.respond is not None else float("inf"))
                 for op in ops]
    worst = None
    failed_total = max_attempts = 0
    for k, op in enumerate(ops):
        last_read: dict[str, int] = {}
        used: set[int] = set()
        attempts = 0
        for e in op.steps:
            if e["op"] == "read":
                last_read[e["cell"]] = e["i"]
            elif e["op"] == "cas" and e["tag"] in ("last-cas", "tail-cas"):
                attempts += 1
                if e["out"] is True:
                    continue
                failed_total += 1
                start = last_read.get(e["cell"], -1)
                match = next((i for i, pid in successes[e["cell"]]
                              if start < i < e["i"] and pid != op.pid and i not in used), None)
                if match is None and worst is None:
                    worst = {"operation": op.token, "failed_cas": e["i"], "cell": e["cell"]}
                if match is not None:
                    used.add(match)
        lo, hi = intervals[k]
        competitors = sum(1 for j, (a, b) in enumerate(intervals) if j != k and a < hi and b > lo)
        max_attempts = max(max_attempts, attempts)
        if op.respond is not None and attempts > 1 + competitors and worst is None:
            worst = {"operation": op.token, "cas_attempts": attempts, "competitors": competitors}
    verdict.set("failed-cas-accounting", worst)
    verdict.counters["failed_cas"] = failed_total
    verdict.counters["max_cas_attempts"] = max_attempts
    verdict.counters["empty_retries"] = sum(
        1 for op in ops for e in op.steps if e["tag"] == "empty-retry")


def check_cas_read_phase(history) -> Verdict:
    """Replay each CAS-log append's read phase from the recorded steps.

    The sequence must be the heads met while following tails from the value
    the successful CAS expected, reversed, followed by the appender's value;
    each read must target the tail of the node reached so far.
    """
    verdict = Verdict()
    bad = None
    for op in _op_steps(history):
        if op.respond is None:
            continue
        wins = [e for e in op.steps if e["op"] == "cas" and e["out"] is True]
        if len(wins) != 1:
            bad = {"operation": op.token, "successful_cas": len(wins)}
            break
        node = wins[0]["in"][0]
        heads = []
        for e in op.steps:
            if e["i"] <= wins[0]["i"] or e["tag"] != "read-phase":
                continue
            if node == "Empty" or e["cell"] != node["tail"]:
                bad = {"operation": op.token, "read": e["i"]}
                break
            heads.append(node["head"])
            node = e["out"]
        if bad:
            break
        expected = list(reversed(heads)) + [op.token]
        if node != "Empty" or history.events[op.respond]["out"] != expected:
            bad = {"operation": op.token, "replayed": expected,
                   "returned": history.events[op.respond]["out"]}
            break
    verdict.set("read-phase-replay", bad)
    return verdict


def last_movement(history) -> dict[str, int]:
    """Forward and backward moves of ``last`` in a consensus-log run."""
    snap = history.outcome.get("snapshot") or history.outcome.get("announcements")
    if not snap or snap["kind"] != "spine":
        return {}
    position = {c: k for k, c in enumerate(SpineSnapshot.from_json(snap).spine_cells())}
    current = 0
    forward = backward = 0
    for e in history.events:
        if e["kind"] == "mem-step" and e["tag"] == "last-write":
            target = position[e["in"][0]]
            if target > current:
                forward += 1
            elif target < current:
                backward += 1
            current = target
    return {"last_forward": forward, "last_backward": backward}


def check_history(history) -> Verdict:
    """Every check relevant to the algorithm that produced ``history``."""
    algo = history.config["algorithm"]
    verdict = Verdict()
    if history.status == "failure":
        fail = next(e for e in history.events if e["kind"] == "failure")
        verdict.set("no-structural-error", {"pid": fail["pid"], "error": fail["out"]})
    else:
        verdict.set("no-structural-error", ok=True)
    if algo.startswith("universal:"):
        verdict.merge(check_universal(history))
    elif algo in ("weaklog-cons", "weaklog-cas"):
        verdict.merge(check_weak_log(WeakLogRunRecord.from_history(history)))
        if algo == "weaklog-cas":
            verdict.merge(check_cas_read_phase(history))
        verdict.counters.update(last_movement(history))
    elif algo == "consensus":
        verdict.merge(check_consensus(history))
    verdict.merge(check_progress(history))
    return verdict


def check_consensus(history) -> Verdict:
    """Agreement and validity over every propose/read answer in a run."""
    verdict = Verdict()
    proposed = {e["in"] for e in history.of_kind("invoke")}
    answers = [e["out"] for e in history.of_kind("respond")]
    decided = history.outcome.get("decided")
    values = set(answers) | ({decided} if decided not in (None, "⊥") else set())
    verdict.set("agreement", None if len(values) <= 1 else {"values": sorted(values)})
    bad = sorted(v for v in values if v not in proposed)
    verdict.set("validity", {"values": bad} if bad else None)
    return verdict


def check_stress(result, window: int = 8, samples: int = 50, seed: int = 0) -> Verdict:
    """Post-hoc checks for a native stress run.

    Weak logs get the full validity/suffixing/total-order check. Universal
    objects get the chain-witness check over the whole run, plus exhaustive
    linearizability on sampled windows of at most ``window`` consecutive
    chain entries, each starting from the state the chain prefix produces.
    A window can only expose violations, never certify the whole run.
    """
    if result.chain is None:
        ops = sorted(result.ops, key=lambda o: o.invoke)
        record = WeakLogRunRecord([OpRecord(o.thread, o.token, list(o.result), o.invoke, o.respond)
                                   for o in ops])
        verdict = check_weak_log(record)
    else:
        spec = get_spec(result.algorithm.split(":", 1)[1])
        ops = [Operation(o.token, result.inputs[o.token], o.invoke, o.respond, o.result)
               for o in sorted(result.ops, key=lambda o: o.invoke)]
        by_token = {op.token: op for op in ops}
        chain = [inv.token for inv in result.chain]
        verdict = Verdict()
        dup = next((t for t, c in _counts(chain).items() if c > 1), None)
        verdict.set("token-uniqueness", None if dup is None else {"token": dup})
        verdict.set("chain-witness", validate_witness(ops, spec, chain))
        rng = random.Random(seed)
        starts = sorted(rng.sample(range(len(chain)), min(samples, len(chain))))
        bad = None
        for start in starts:
            state, _ = spec.replay(result.chain[:start])
            segment = [by_token[t] for t in chain[start:start + window] if t in by_token]
            v = check_linearizable(segment, spec, initial_state=state, max_ops=window)
            if not v.passed:
                bad = {"start": start, **v.failures()["linearizable"]}
                break
        verdict.set("windowed-linearizable", bad)
        verdict.counters["windows"] = len(starts)
    verdict.counters["operations"] = len(result.ops)
    verdict.counters["elapsed_s"] = round(result.elapsed, 3)
    verdict.counters["throughput_ops_s"] = round(result.throughput, 1)
    verdict.set("finished", None if result.finished else
                {"completed": len(result.ops), "reason": "duration exceeded"})
    return verdict
