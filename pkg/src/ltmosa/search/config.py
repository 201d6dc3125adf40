from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Optional

ALGORITHMS = ("mio", "mosa", "lt-mosa")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    algorithm: str = "lt-mosa"
    population_size: int = 50
    crossover_probability: float = 0.75
    tournament_size: int = 10
    linkage_frequency: int = 10
    mio_capacity: int = 10
    mio_f: float = 0.5
    mio_pr: float = 0.5
    max_evaluations: Optional[int] = 20_000
    max_seconds: Optional[float] = None
    max_test_length: int = 40
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        for name in ("crossover_probability", "mio_f", "mio_pr"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        for name in ("population_size", "tournament_size", "linkage_frequency", "mio_capacity", "max_test_length"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.max_evaluations is None and self.max_seconds is None:
            raise ConfigError("a budget (evaluations or seconds) is required")
        if self.max_evaluations is not None and self.max_evaluations <= 0:
            raise ConfigError("max_evaluations must be positive")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ConfigError("max_seconds must be positive")

    def to_json(self) -> dict:
        return asdict(self)


class Budget:
    """Evaluation-count and/or wall-clock search budget."""

    def __init__(self, max_evaluations: Optional[int] = None, max_seconds: Optional[float] = None):
        self.max_evaluations = max_evaluations
        self.max_seconds = max_seconds
        self.evaluations = 0
        self._start = time.monotonic()

    @classmethod
    def from_config(cls, config: SearchConfig) -> Budget:
        return cls(config.max_evaluations, config.max_seconds)

    def elapsed(self) -> float:
        return time.monotonic() - self._start

    def fraction(self) -> float:
        """Consumed share of the budget, the larger of the active limits."""
        parts = []
        if self.max_evaluations is not None:
            parts.append(self.evaluations / self.max_evaluations)
        if self.max_seconds is not None:
            parts.append(self.elapsed() / self.max_seconds)
        return min(1.0, max(parts))

    def exhausted(self) -> bool:
        if self.max_evaluations is not None and self.evaluations >= self.max_evaluations:
            return True
        return self.max_seconds is not None and self.elapsed() >= self.max_seconds
