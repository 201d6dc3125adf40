"""Korel-style branch distances for the predicates of simulated handlers.

Every function returns raw, un-normalized distances; ``normalize`` maps a raw
distance into ``[0, 1)``.
"""

from __future__ import annotations

import datetime as dt
from typing import Any

OPERATORS = ("==", "!=", "<", "<=", ">", ">=")
NEGATION = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


# raw distance for a lookup into an empty collection; nearest-key gaps stay below it
EMPTY_LOOKUP_DISTANCE = 10_000.0


class Membership:
    """Result of a keyed lookup: truthiness plus how far the key was from a hit."""

    __slots__ = ("found", "gap")

    def __init__(self, found: bool, gap: float):
        self.found = found
        self.gap = gap

    def __bool__(self) -> bool:
        return self.found

    def __eq__(self, other):
        return bool(self) == other

    def __hash__(self):
        return hash(self.found)

    def __repr__(self) -> str:
        return f"Membership({self.found}, gap={self.gap})"


def lookup(key: Any, keys) -> Membership:
    """Membership of ``key`` in ``keys`` with the distance to the nearest key."""
    if key in keys:
        return Membership(True, 0.0)
    if not keys:
        return Membership(False, EMPTY_LOOKUP_DISTANCE)
    best = EMPTY_LOOKUP_DISTANCE - 1.0
    kn = _as_number(key)
    for other in keys:
        if isinstance(key, str) and isinstance(other, str):
            gap = string_distance(key, other)
        else:
            on = _as_number(other)
            gap = abs(kn - on) if kn is not None and on is not None else best
        if gap < best:
            best = gap
    return Membership(False, max(best, 1.0))


def normalize(d: float) -> float:
    return d / (d + 1.0)


def _as_number(v: Any) -> float | None:
    if isinstance(v, bool):
        return float(v)
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, dt.date):
        return float(v.toordinal())
    return None


def string_distance(a: str, b: str) -> float:
    """Sum of absolute character-code differences, shorter string padded with 0."""
    n = max(len(a), len(b))
    a = a.ljust(n, "\0")
    b = b.ljust(n, "\0")
    return float(sum(abs(ord(x) - ord(y)) for x, y in zip(a, b)))


def raw_distance(lhs: Any, op: str, rhs: Any) -> float:
    """Distance to making ``lhs op rhs`` true; 0 iff it already holds."""
    if isinstance(lhs, Membership) and isinstance(rhs, bool) and op in ("==", "!="):
        want = rhs if op == "==" else not rhs
        if lhs.found == want:
            return 0.0
        return lhs.gap if want else 1.0
    x = _as_number(lhs)
    y = _as_number(rhs)
    if x is not None and y is not None:
        if op == "==":
            return abs(x - y)
        if op == "!=":
            return 0.0 if x != y else 1.0
        if op == "<":
            return 0.0 if x < y else x - y + 1.0
        if op == "<=":
            return 0.0 if x <= y else x - y
        if op == ">":
            return 0.0 if x > y else y - x + 1.0
        if op == ">=":
            return 0.0 if x >= y else y - x
        raise ValueError(f"unknown operator {op!r}")
    if isinstance(lhs, str) and isinstance(rhs, str):
        if op == "==":
            return string_distance(lhs, rhs)
        if op == "!=":
            return 0.0 if lhs != rhs else 1.0
        holds = {"<": lhs < rhs, "<=": lhs <= rhs, ">": lhs > rhs, ">=": lhs >= rhs}[op]
        return 0.0 if holds else 1.0
    # mismatched or missing operands: only (in)equality is meaningful
    equal = lhs == rhs
    if op == "==":
        return 0.0 if equal else 1.0
    if op == "!=":
        return 0.0 if not equal else 1.0
    return 1.0


def evaluate(lhs: Any, op: str, rhs: Any) -> tuple[bool, float, float]:
    """Evaluate a predicate.

    Returns:
        ``(outcome, d_true, d_false)`` where the distances are normalized and
        exactly one of them is 0.
    """
    d_true = raw_distance(lhs, op, rhs)
    if d_true == 0.0:
        return True, 0.0, normalize(raw_distance(lhs, NEGATION[op], rhs))
    return False, normalize(d_true), 0.0
