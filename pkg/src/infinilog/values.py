from __future__ import annotations

from dataclasses import dataclass
from typing import Any


class StructuralCorruption(Exception):
    """A shared structure reached a state the algorithm rules out."""


@dataclass(frozen=True)
class AppendedValue:
    """A value handed to a weak log. Identity is the token, never the payload."""

    token: str
    payload: Any = None

    def describe(self) -> str:
        return self.token


def same(a: Any, b: Any) -> bool:
    return a.token == b.token
