"""Individuals, the coverage archive, evaluation and the event log."""

from __future__ import annotations

import json
import time
from collections.abc import Iterable
from typing import Optional

from ..api_model import ActionCatalog, TestCase, test_to_json
from ..harness.results import FaultSignature, Sut
from .config import Budget


class Individual:
    __slots__ = ("test", "objectives", "covered", "faults", "rank")

    def __init__(self, test: TestCase, objectives: tuple[float, ...], covered: frozenset[int],
                 faults: frozenset[FaultSignature] = frozenset()):
        self.test = test
        self.objectives = objectives
        self.covered = covered
        self.faults = faults
        self.rank = 0

    def __len__(self) -> int:
        return len(self.test.statements)

    def __repr__(self) -> str:
        return f"Individual(len={len(self)}, covered={len(self.covered)}, rank={self.rank})"


class Evaluator:
    """Resets the SUT, runs one test, and charges the budget."""

    def __init__(self, sut: Sut, budget: Budget):
        self.sut = sut
        self.budget = budget

    def __call__(self, test: TestCase) -> Individual:
        self.sut.reset()
        result = self.sut.execute(test)
        self.budget.evaluations += 1
        return Individual(test, result.objectives, result.covered, result.faults)


class Archive:
    """Shortest covering test per target."""

    def __init__(self, n_targets: int):
        self.n_targets = n_targets
        self.best: dict[int, Individual] = {}

    def update(self, ind: Individual) -> list[int]:
        """Store ``ind`` for each target it covers where it is the first or strictly shorter.

        Returns the targets covered for the first time.
        """
        fresh = []
        for t in ind.covered:
            current = self.best.get(t)
            if current is None:
                self.best[t] = ind
                fresh.append(t)
            elif len(ind) < len(current):
                self.best[t] = ind
        return fresh

    def __len__(self) -> int:
        return len(self.best)

    def covered(self) -> set[int]:
        return set(self.best)

    def uncovered(self) -> list[int]:
        return [t for t in range(self.n_targets) if t not in self.best]

    def suite(self) -> list[Individual]:
        """Distinct archived individuals, ordered by first target covered."""
        seen = set()
        out = []
        for t in sorted(self.best):
            ind = self.best[t]
            if id(ind) not in seen:
                seen.add(id(ind))
                out.append(ind)
        return out

    def faults(self) -> set[FaultSignature]:
        found: set[FaultSignature] = set()
        for ind in self.best.values():
            found |= ind.faults
        return found

    def to_json(self, catalog: ActionCatalog) -> list[dict]:
        out = []
        for ind in self.suite():
            out.append(
                {
                    "statements": test_to_json(ind.test, catalog),
                    "covered_targets": sorted(t for t, best in self.best.items() if best is ind),
                    "faults": [f.to_json() for f in sorted(ind.faults)],
                }
            )
        return out


class EventLog:
    """Per-generation progress records."""

    def __init__(self):
        self.records: list[dict] = []

    def record(self, generation: int, evaluations: int, covered_count: int, model_trained: bool = False,
               timestamp: Optional[float] = None) -> dict:
        rec = {
            "generation": generation,
            "evaluations": evaluations,
            "covered_count": covered_count,
            "model_trained": model_trained,
            "timestamp": time.time() if timestamp is None else timestamp,
        }
        self.records.append(rec)
        return rec

    def trained_generations(self) -> list[int]:
        return [r["generation"] for r in self.records if r["model_trained"]]

    def series(self) -> list[tuple[int, int]]:
        return [(r["evaluations"], r["covered_count"]) for r in self.records]

    def dumps(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def read(cls, path) -> EventLog:
        log = cls()
        with open(path, encoding="utf-8") as fh:
            log.records = [json.loads(line) for line in fh if line.strip()]
        return log

    def without_timestamps(self) -> list[dict]:
        return [{k: v for k, v in r.items() if k != "timestamp"} for r in self.records]


def update_archive(archive: Archive, individuals: Iterable[Individual]) -> Archive:
    for ind in individuals:
        archive.update(ind)
    return archive
