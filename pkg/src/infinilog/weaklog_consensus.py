"""Weak log over consensus cells with passive helping.

The shared structure is a spine of consensus cells. Each decided spine cell
holds a :class:`ListLink` whose ``node`` starts a side chain of
:class:`NodeLink` cells. A process that loses the spine consensus inserts its
value into the side chain pre-created by the winner, so it only competes with
the processes that read the same spine cell from ``last``.

Step tags used by the harness and checkers:

``last-read``      read of ``last``
``spine-propose``  proposal on the spine cell obtained from ``last``
``last-write``     write of the winner's successor cell into ``last``
``side-propose``   proposal on a side-chain cell
``collect``        reads performed while building the returned sequence
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .substrate import UNDECIDED, Memory, StepGen, propose, read, write
from .values import StructuralCorruption


@dataclass(frozen=True, eq=False)
class NodeLink:
    value: Any
    next: Any  # ConsensusCell[NodeLink]

    def describe(self) -> dict:
        return {"value": self.value.describe(), "next": self.next.cid}


@dataclass(frozen=True, eq=False)
class ListLink:
    node: NodeLink
    next: Any  # ConsensusCell[ListLink]

    def describe(self) -> dict:
        return {"node": self.node.describe(), "next": self.next.cid}


@dataclass(frozen=True)
class SpineList:
    cell: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class SpineSnapshot:
    """Decided part of the structure: spine lists in order plus the open tail cell."""

    lists: tuple[SpineList, ...]
    tail: str
    last: str

    kind = "spine"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "lists": [{"cell": l.cell, "values": list(l.values)} for l in self.lists],
            "tail": self.tail,
            "last": self.last,
        }

    @classmethod
    def from_json(cls, data: dict) -> SpineSnapshot:
        lists = tuple(SpineList(l["cell"], tuple(l["values"])) for l in data["lists"])
        return cls(lists, data["tail"], data["last"])

    def spine_cells(self) -> list[str]:
        """Spine cell ids in order, ending with the undecided tail cell."""
        return [l.cell for l in self.lists] + [self.tail]


@dataclass(eq=False)
class WeakLogCons:
    mem: Memory
    first: Any = field(init=False)
    last: Any = field(init=False)

    def __post_init__(self) -> None:
        self.first = self.mem.consensus()
        self.last = self.mem.register(self.first)

    def append(self, v) -> StepGen:
        cell = yield from read(self.last, "last-read")
        mine = ListLink(NodeLink(v, self.mem.consensus()), self.mem.consensus())
        decided = yield from propose(cell, mine, "spine-propose")
        yield from write(self.last, decided.next, "last-write")

        cursor = decided.node
        while cursor.value.token != v.token:
            cursor = yield from propose(
                cursor.next, NodeLink(v, self.mem.consensus()), "side-propose")

        log = []
        lst = yield from read(self.first, "collect")
        if lst is UNDECIDED:
            raise StructuralCorruption("first is undecided after an insertion")
        node = lst.node
        while True:
            log.append(node.value)
            if node.value.token == v.token:
                return log
            node = yield from read(node.next, "collect")
            if node is UNDECIDED:
                lst = yield from read(lst.next, "collect")
                if lst is UNDECIDED:
                    raise StructuralCorruption(
                        f"collect ran off the spine before finding {v.token}")
                node = lst.node

    def snapshot(self) -> SpineSnapshot:
        lists = []
        cell = self.first
        seen = set()
        while (link := cell.peek()) is not UNDECIDED:
            if cell.cid in seen:
                raise StructuralCorruption(f"spine cycle at {cell.cid}")
            seen.add(cell.cid)
            values = []
            node = link.node
            while True:
                values.append(node.value.token)
                node = node.next.peek()
                if node is UNDECIDED:
                    break
            lists.append(SpineList(cell.cid, tuple(values)))
            cell = link.next
        return SpineSnapshot(tuple(lists), cell.cid, self.last.peek().cid)
