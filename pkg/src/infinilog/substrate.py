"""Shared registers: consensus cells, read/write registers and CAS cells.

Algorithms never call cell methods directly. They build :class:`Step` objects
through the generator helpers :func:`read`, :func:`write`, :func:`propose` and
:func:`cas`, and ``yield`` them to whichever driver runs the task. The
simulated driver executes one step per scheduler slot and records it; the
native driver executes steps immediately on the calling thread.

Both memories hand out the same cell classes. Native cells carry a real lock
so that every operation is atomic across threads; simulated cells share a
no-op context manager because only one step runs at a time.
"""

from __future__ import annotations

import contextlib
import enum
import itertools
import threading
from dataclasses import dataclass
from typing import Any, Generator

DEFAULT_ALLOCATIONS_PER_STEP = 4


class Marker(enum.Enum):
    UNDECIDED = "⊥"
    EMPTY = "Empty"

    def __repr__(self) -> str:
        return self.value


UNDECIDED = Marker.UNDECIDED
EMPTY = Marker.EMPTY


class ModelViolation(Exception):
    """Algorithm code broke a rule of the shared-memory model."""


class AllocationBudgetExceeded(ModelViolation):
    pass


class Cell:
    kind = "cell"
    __slots__ = ("cid", "_value", "_lock")

    def __init__(self, cid: str, value: Any, lock) -> None:
        self.cid = cid
        self._value = value
        self._lock = lock

    def peek(self) -> Any:
        """Current content, outside of any step (snapshots and tests only)."""
        return self._value

    def read(self) -> Any:
        return self._value

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.cid}={self._value!r})"


class ConsensusCell(Cell):
    """Sticky cell: the first proposal is decided and never changes."""

    kind = "consensus"
    __slots__ = ()

    def __init__(self, cid: str, lock) -> None:
        super().__init__(cid, UNDECIDED, lock)

    def propose(self, value: Any) -> Any:
        with self._lock:
            if self._value is UNDECIDED:
                self._value = value
            return self._value


class RwRegister(Cell):
    kind = "register"
    __slots__ = ()

    def write(self, value: Any) -> None:
        with self._lock:
            self._value = value


class CasCell(Cell):
    kind = "cas"
    __slots__ = ()

    def cas(self, expect: Any, update: Any) -> bool:
        with self._lock:
            if self._value is expect or self._value == expect:
                self._value = update
                return True
            return False


class CasConsensusCell:
    """Consensus emulated on a CAS cell: propose(v) is cas(⊥, v) then read."""

    kind = "consensus"
    __slots__ = ("cell",)

    def __init__(self, cell: CasCell) -> None:
        self.cell = cell

    @property
    def cid(self) -> str:
        return self.cell.cid

    def peek(self) -> Any:
        return self.cell.peek()

    def __repr__(self) -> str:
        return f"CasConsensusCell({self.cell.cid}={self.cell.peek()!r})"


@dataclass(frozen=True, slots=True)
class Step:
    """One shared-memory access, the unit of scheduling."""

    cell: Cell
    op: str
    args: tuple = ()
    tag: str = ""

    def execute(self) -> Any:
        return getattr(self.cell, self.op)(*self.args)


StepGen = Generator[Step, Any, Any]


def read(cell, tag: str = "") -> StepGen:
    if isinstance(cell, CasConsensusCell):
        cell = cell.cell
    return (yield Step(cell, "read", (), tag))


def write(reg: RwRegister, value: Any, tag: str = "") -> StepGen:
    return (yield Step(reg, "write", (value,), tag))


def cas(cell: CasCell, expect: Any, update: Any, tag: str = "") -> StepGen:
    return (yield Step(cell, "cas", (expect, update), tag))


def propose(cell, value: Any, tag: str = "") -> StepGen:
    """Propose ``value`` and return the decided value."""
    if isinstance(cell, CasConsensusCell):
        yield Step(cell.cell, "cas", (UNDECIDED, value), tag)
        return (yield Step(cell.cell, "read", (), f"{tag}:read" if tag else ""))
    return (yield Step(cell, "propose", (value,), tag))


def drive(gen: StepGen) -> Any:
    """Run a task to completion on the calling thread (native execution)."""
    result = None
    try:
        while True:
            step = gen.send(result)
            result = step.execute()
    except StopIteration as stop:
        return stop.value


class Memory:
    """Cell allocator. Subclasses choose locking and allocation accounting."""

    def __init__(self, consensus_via_cas: bool = False) -> None:
        self.consensus_via_cas = consensus_via_cas
        self.allocated = 0

    def _lock(self):
        raise NotImplementedError

    def _next_id(self) -> str:
        raise NotImplementedError

    def _count_allocation(self) -> None:
        self.allocated += 1

    def consensus(self):
        if self.consensus_via_cas:
            return CasConsensusCell(self.cas_cell(UNDECIDED))
        self._count_allocation()
        return ConsensusCell(self._next_id(), self._lock())

    def register(self, value: Any) -> RwRegister:
        self._count_allocation()
        return RwRegister(self._next_id(), value, self._lock())

    def cas_cell(self, value: Any) -> CasCell:
        self._count_allocation()
        return CasCell(self._next_id(), value, self._lock())


_NO_LOCK = contextlib.nullcontext()


class SimulatedMemory(Memory):
    """Memory for single-threaded scheduled execution.

    Cell ids are dense (``c0``, ``c1``, ...) so that two runs of the same
    schedule produce identical histories. The harness calls
    :meth:`begin_local` before resuming a task; allocating more than
    ``budget`` cells before the task's next step raises
    :class:`AllocationBudgetExceeded`.
    """

    def __init__(self, budget: int | None = DEFAULT_ALLOCATIONS_PER_STEP,
                 consensus_via_cas: bool = False) -> None:
        super().__init__(consensus_via_cas)
        self.budget = budget
        self._ids = itertools.count()
        self._in_step: int | None = None

    def _lock(self):
        return _NO_LOCK

    def _next_id(self) -> str:
        return f"c{next(self._ids)}"

    def begin_local(self) -> None:
        self._in_step = 0

    def end_local(self) -> None:
        self._in_step = None

    def _count_allocation(self) -> None:
        super()._count_allocation()
        if self._in_step is None:
            return
        self._in_step += 1
        if self.budget is not None and self._in_step > self.budget:
            raise AllocationBudgetExceeded(
                f"{self._in_step} cells allocated in one step (budget {self.budget})")


class NativeMemory(Memory):
    """Memory whose cells are safe to share between real threads."""

    def __init__(self, consensus_via_cas: bool = False) -> None:
        super().__init__(consensus_via_cas)
        self._ids = itertools.count()
        self._count_lock = threading.Lock()

    def _lock(self):
        return threading.Lock()

    def _next_id(self) -> str:
        return f"n{next(self._ids)}"

    def _count_allocation(self) -> None:
        with self._count_lock:
            self.allocated += 1


def describe(value: Any) -> Any:
    """JSON-friendly rendering of a cell content or a returned value."""
    if isinstance(value, Marker):
        return value.value
    if isinstance(value, (Cell, CasConsensusCell)):
        return value.cid
    if hasattr(value, "describe"):
        return value.describe()
    if isinstance(value, (list, tuple)):
        return [describe(v) for v in value]
    if isinstance(value, dict):
        return {str(k): describe(v) for k, v in value.items()}
    return value
