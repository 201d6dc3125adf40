from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

from ..api_model import ActionCatalog, LiteralPools, TestCase


@dataclass(frozen=True)
class CoverageTarget:
    id: int
    kind: str  # "line", "branch-true", "branch-false", or "status-<n>xx" for live SUTs
    action: int
    statement: Optional[int] = None

    def describe(self, catalog: ActionCatalog) -> str:
        where = catalog[self.action].key
        if self.statement is None:
            return f"{where} {self.kind}"
        return f"{where} #{self.statement} {self.kind}"


@dataclass(frozen=True, order=True)
class FaultSignature:
    """One unique 5xx failure: endpoint plus the last SUT statement executed."""

    method: str
    endpoint: str
    last_statement_id: Optional[int]
    status: int = 500

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "endpoint": self.endpoint,
            "last_statement_id": self.last_statement_id,
            "status": self.status,
        }

    @classmethod
    def from_json(cls, raw: dict) -> FaultSignature:
        return cls(raw["method"], raw["endpoint"], raw["last_statement_id"], raw.get("status", 500))


@dataclass(frozen=True)
class ExecutionResult:
    objectives: tuple[float, ...]
    covered: frozenset[int]
    faults: frozenset[FaultSignature]
    statuses: tuple[int, ...]


class Sut(Protocol):
    """What the search engine needs from a system under test."""

    name: str
    catalog: ActionCatalog
    literal_pools: LiteralPools

    def enumerate_targets(self) -> list[CoverageTarget]: ...

    def reset(self) -> None: ...

    def execute(self, test: TestCase) -> ExecutionResult: ...


def make_result(objectives: list[float], faults: set, statuses: list[int]) -> ExecutionResult:
    covered = frozenset(i for i, d in enumerate(objectives) if d == 0.0)
    return ExecutionResult(tuple(objectives), covered, frozenset(faults), tuple(statuses))
