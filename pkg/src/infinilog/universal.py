"""Universal construction: any total sequential object as a wait-free object.

Processes announce their invocation in a weak log, then walk a chain of
consensus cells from its fixed head, proposing the oldest announced
invocation that is not yet in the chain at every undecided cell. Each process
replays the agreed chain from the initial state to compute its own result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .substrate import Memory, StepGen, propose


class ImpossibilityViolation(Exception):
    """The help loop finished without ever deciding the caller's invocation."""


@dataclass(frozen=True)
class Invocation:
    op: str
    args: tuple = ()
    token: str = ""

    def describe(self) -> dict:
        return {"op": self.op, "args": list(self.args), "token": self.token}

    @classmethod
    def from_json(cls, data: dict) -> Invocation:
        return cls(data["op"], tuple(data["args"]), data["token"])


@dataclass(frozen=True)
class SequentialSpec:
    name: str
    initial_state: Any
    transition: Callable[[Any, Invocation], tuple[Any, Any]]

    def replay(self, invocations) -> tuple[Any, list]:
        state, results = self.initial_state, []
        for inv in invocations:
            state, res = self.transition(state, inv)
            results.append(res)
        return state, results


SPECS: dict[str, SequentialSpec] = {}


def register_spec(name: str, initial_state: Any,
                  transition: Callable[[Any, Invocation], tuple[Any, Any]]) -> SequentialSpec:
    if name in SPECS:
        raise ValueError(f"sequential spec {name!r} already registered")
    spec = SequentialSpec(name, initial_state, transition)
    SPECS[name] = spec
    return spec


def get_spec(name: str) -> SequentialSpec:
    try:
        return SPECS[name]
    except KeyError:
        raise ValueError(f"unknown sequential spec {name!r}; known: {sorted(SPECS)}") from None


# Results are JSON scalars; None is the empty marker for deq/pop.
OK = "ok"


def _counter(state: int, inv: Invocation):
    if inv.op == "inc":
        return state + 1, state + 1
    if inv.op == "get":
        return state, state
    raise ValueError(f"counter has no operation {inv.op!r}")


def _queue(state: tuple, inv: Invocation):
    if inv.op == "enq":
        return state + (inv.args[0],), OK
    if inv.op == "deq":
        return (state[1:], state[0]) if state else (state, None)
    raise ValueError(f"queue has no operation {inv.op!r}")


def _stack(state: tuple, inv: Invocation):
    if inv.op == "push":
        return state + (inv.args[0],), OK
    if inv.op == "pop":
        return (state[:-1], state[-1]) if state else (state, None)
    raise ValueError(f"stack has no operation {inv.op!r}")


def _rwcell(state: Any, inv: Invocation):
    if inv.op == "write":
        return inv.args[0], OK
    if inv.op == "read":
        return state, state
    raise ValueError(f"rwcell has no operation {inv.op!r}")


COUNTER = register_spec("counter", 0, _counter)
QUEUE = register_spec("queue", (), _queue)
STACK = register_spec("stack", (), _stack)
RWCELL = register_spec("rwcell", None, _rwcell)


@dataclass(frozen=True, eq=False)
class OpsLink:
    invocation: Invocation
    next: Any  # ConsensusCell[OpsLink]

    def describe(self) -> dict:
        return {"invocation": self.invocation.describe(), "next": self.next.cid}


@dataclass(eq=False)
class UniversalObject:
    mem: Memory
    spec: SequentialSpec
    announcements: Any  # WeakLogCons or WeakLogCas
    operations: Any = field(init=False)
    # harness instrumentation: announced tokens seen by each invocation
    help_lists: dict = field(init=False, default_factory=dict)

    def __post_init__(self) -> None:
        self.operations = self.mem.consensus()

    def apply(self, invok: Invocation) -> StepGen:
        to_help = yield from self.announcements.append(invok)
        self.help_lists[invok.token] = [inv.token for inv in to_help]
        cons = self.operations
        state = self.spec.initial_state
        result = None
        decided_mine = False
        while to_help:
            decided = yield from propose(
                cons, OpsLink(to_help[0], self.mem.consensus()), "ops-propose")
            token = decided.invocation.token
            to_help = [inv for inv in to_help if inv.token != token]
            state, res = self.spec.transition(state, decided.invocation)
            if token == invok.token:
                result, decided_mine = res, True
            cons = decided.next
        if not decided_mine:
            raise ImpossibilityViolation(f"{invok.token} never decided in the chain")
        return result

    def decided_chain(self) -> list[Invocation]:
        chain = []
        cell = self.operations
        while hasattr(link := cell.peek(), "invocation"):
            chain.append(link.invocation)
            cell = link.next
        return chain
