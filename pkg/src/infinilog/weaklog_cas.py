"""Weak log as a CAS-managed stack with insertion after the node first read.

A process first tries to push its node on ``last``. If that CAS fails, it
walks down from the node it read and splices its node directly below it,
retrying on the same tail cell only while newer insertions keep landing
there. The returned sequence is the chain below the inserted node, read
bottom-up, followed by the process's own value.

Retry rule when a CAS fails while the expected value is ``EMPTY``: the walk
cannot step into ``EMPTY``, so the process re-reads the same cell and retries
on it (tag ``empty-retry``). With ``empty_retry=False`` the log raises
:class:`StructuralCorruption` instead, which is what a loop without the
rule runs into.

Step tags: ``last-read``, ``last-cas``, ``tail-read``, ``tail-cas``,
``empty-retry``, ``read-phase``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

from .substrate import EMPTY, Memory, StepGen, cas, read
from .values import StructuralCorruption


@dataclass(frozen=True, eq=False)
class CasNode:
    head: Any
    tail: Any  # CasCell[CasNode | EMPTY]

    def describe(self) -> dict:
        return {"head": self.head.describe(), "tail": self.tail.cid}


@dataclass(frozen=True)
class ChainSnapshot:
    """Chain from ``last`` down to ``EMPTY``, newest first."""

    nodes: tuple[str, ...]

    kind = "chain"

    def to_json(self) -> dict:
        return {"kind": self.kind, "nodes": list(self.nodes)}

    @classmethod
    def from_json(cls, data: dict) -> ChainSnapshot:
        return cls(tuple(data["nodes"]))


@dataclass(eq=False)
class WeakLogCas:
    mem: Memory
    empty_retry: bool = True
    last: Any = field(init=False)

    def __post_init__(self) -> None:
        self.last = self.mem.cas_cell(EMPTY)

    def append(self, v) -> StepGen:
        target = self.last
        nxt = yield from read(target, "last-read")
        while True:
            tag = "last-cas" if target is self.last else "tail-cas"
            if (yield from cas(target, nxt, CasNode(v, self.mem.cas_cell(nxt)), tag)):
                break
            if nxt is EMPTY:
                if not self.empty_retry:
                    raise StructuralCorruption("walk would step into Empty")
                nxt = yield from read(target, "empty-retry")
            else:
                target = nxt.tail
                nxt = yield from read(target, "tail-read")

        log = deque([v])
        while nxt is not EMPTY:
            log.appendleft(nxt.head)
            nxt = yield from read(nxt.tail, "read-phase")
        return list(log)

    def snapshot(self) -> ChainSnapshot:
        tokens = []
        seen = set()
        node = self.last.peek()
        while node is not EMPTY:
            if id(node) in seen:
                raise StructuralCorruption("cycle in chain")
            seen.add(id(node))
            tokens.append(node.head.token)
            node = node.tail.peek()
        return ChainSnapshot(tuple(tokens))
