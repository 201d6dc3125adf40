"""Many Independent Objective (MIO) search."""

from __future__ import annotations

import random
from collections.abc import Iterable

from ..api_model import random_test
from ..harness.results import Sut
from .config import Budget, ConfigError, SearchConfig
from .core import Archive, EventLog, Evaluator, Individual
from .mosa import INIT_GENERATION, SearchResult
from .operators import mutate


class TargetPopulation:
    """Bounded population scored on a single target (lower distance is better)."""

    def __init__(self, target: int, capacity: int):
        self.target = target
        self.capacity = capacity
        self.members: list[tuple[float, int, int, Individual]] = []  # (distance, length, seq, ind)
        self.counter = 0

    def __len__(self) -> int:
        return len(self.members)

    def best_key(self):
        return min(m[:2] for m in self.members) if self.members else None

    def offer(self, ind: Individual, seq: int) -> bool:
        """Insert ``ind``; evict the worst member on overflow.

        Returns True when ``ind`` strictly improved the population's best, in
        which case the sampling counter is reset.
        """
        d = ind.objectives[self.target]
        if d >= 1.0:
            return False  # no guidance at all toward this target
        key = (d, len(ind))
        best = self.best_key()
        improved = best is None or key < best
        self.members.append((d, len(ind), seq, ind))
        if len(self.members) > self.capacity:
            # worst fitness, then longest, then most recent
            self.members.remove(max(self.members, key=lambda m: (m[0], m[1], m[2])))
        if improved:
            self.counter = 0
        return improved

    def sample(self, rng: random.Random) -> Individual:
        self.counter += 1
        return self.members[rng.randrange(len(self.members))][3]


class MioPopulations:
    def __init__(self, targets: Iterable[int], capacity: int):
        self.pops = {t: TargetPopulation(t, capacity) for t in targets}
        self._seq = 0

    def drop(self, targets: Iterable[int]) -> None:
        for t in targets:
            self.pops.pop(t, None)

    def offer(self, ind: Individual) -> None:
        self._seq += 1
        for pop in self.pops.values():
            pop.offer(ind, self._seq)

    def lowest_counter(self) -> TargetPopulation | None:
        """Non-empty population with the lowest counter (ties: lowest target id)."""
        best = None
        for t in sorted(self.pops):
            pop = self.pops[t]
            if pop.members and (best is None or pop.counter < best.counter):
                best = pop
        return best


def random_probability(config: SearchConfig, fraction: float) -> float:
    if fraction >= config.mio_f:
        return 0.0
    return config.mio_pr * (1.0 - fraction / config.mio_f)


def focus_fraction(config: SearchConfig, fraction: float) -> float:
    """Budget fraction rescaled so that mutation peaks once the focused phase starts."""
    if config.mio_f == 0.0:
        return 1.0
    return min(1.0, fraction / config.mio_f)


def run_mio(config: SearchConfig, sut: Sut) -> SearchResult:
    if config.algorithm != "mio":
        raise ConfigError(f"run_mio called with algorithm={config.algorithm!r}")
    rng = random.Random(config.seed)
    catalog, pools = sut.catalog, sut.literal_pools
    max_len = config.max_test_length
    budget = Budget.from_config(config)
    evaluate = Evaluator(sut, budget)
    archive = Archive(len(sut.enumerate_targets()))
    events = EventLog()
    pops = MioPopulations(range(archive.n_targets), config.mio_capacity)
    period = config.population_size  # evaluations per logged pseudo-generation

    events.record(INIT_GENERATION, 0, 0)
    generation = 0
    while not budget.exhausted() and len(archive) < archive.n_targets:
        fraction = budget.fraction()
        source = pops.lowest_counter()
        if source is None or rng.random() < random_probability(config, fraction):
            test = random_test(catalog, rng, max_len, pools)
        else:
            parent = source.sample(rng)
            test = mutate(parent.test, focus_fraction(config, fraction), catalog, pools, rng, max_len)
        ind = evaluate(test)
        pops.drop(archive.update(ind))
        pops.offer(ind)
        if budget.evaluations % period == 0:
            events.record(generation, budget.evaluations, len(archive))
            generation += 1
    if events.records[-1]["evaluations"] != budget.evaluations:
        events.record(generation, budget.evaluations, len(archive))
    return SearchResult(archive, events, budget.evaluations)
