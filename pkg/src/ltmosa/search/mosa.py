"""MOSA and its linkage-learning variant LT-MOSA."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

from ..api_model import random_test
from ..harness.results import Sut
from ..linkage import LinkageTree, ModelUnavailable, encode_population, extract_fos, train_linkage_tree
from .config import Budget, ConfigError, SearchConfig
from .core import Archive, EventLog, Evaluator, Individual
from .operators import linkage_recombination, mosa_mutate, mutate, single_point_crossover
from .sorting import environmental_selection, preference_sorting, tournament_selection

log = logging.getLogger(__name__)

INIT_GENERATION = -1  # event-log generation number of the initial population


@dataclass
class SearchResult:
    archive: Archive
    events: EventLog
    evaluations: int
    linkage_trees: list[tuple[int, LinkageTree]] = field(default_factory=list)


def run_mosa(config: SearchConfig, sut: Sut, keep_trees: bool = False) -> SearchResult:
    if config.algorithm != "mosa":
        raise ConfigError(f"run_mosa called with algorithm={config.algorithm!r}")
    return _run(config, sut, linkage=False, keep_trees=keep_trees)


def run_lt_mosa(config: SearchConfig, sut: Sut, keep_trees: bool = False) -> SearchResult:
    if config.algorithm != "lt-mosa":
        raise ConfigError(f"run_lt_mosa called with algorithm={config.algorithm!r}")
    return _run(config, sut, linkage=True, keep_trees=keep_trees)


def _run(config: SearchConfig, sut: Sut, linkage: bool, keep_trees: bool) -> SearchResult:
    rng = random.Random(config.seed)
    catalog, pools = sut.catalog, sut.literal_pools
    max_len = config.max_test_length
    budget = Budget.from_config(config)
    evaluate = Evaluator(sut, budget)
    archive = Archive(len(sut.enumerate_targets()))
    events = EventLog()
    trees: list[tuple[int, LinkageTree]] = []
    size = config.population_size

    population: list[Individual] = []
    while len(population) < size and not budget.exhausted():
        ind = evaluate(random_test(catalog, rng, max_len, pools))
        archive.update(ind)
        population.append(ind)
    fronts = preference_sorting(population, archive.uncovered())
    events.record(INIT_GENERATION, budget.evaluations, len(archive))

    fos = None
    generation = 0
    while not budget.exhausted() and len(archive) < archive.n_targets:
        trained = False
        if linkage and generation % config.linkage_frequency == 0:
            try:
                tree = train_linkage_tree(encode_population([i.test for i in fronts[0]], len(catalog)))
            except ModelUnavailable:
                fos = None  # single-point crossover until the next training
            else:
                fos = extract_fos(tree)
                trained = True
                if keep_trees:
                    trees.append((generation, tree))

        offspring: list[Individual] = []
        while len(offspring) < size and not budget.exhausted():
            if linkage:
                children = [_lt_child(config, population, fos, catalog, pools, rng, budget.fraction())]
            else:
                children = _mosa_children(config, population, catalog, pools, rng)
            for child in children:
                if len(offspring) >= size or budget.exhausted():
                    break
                ind = evaluate(child)
                archive.update(ind)
                offspring.append(ind)

        fronts = preference_sorting(population + offspring, archive.uncovered())
        population = environmental_selection(fronts, size)
        events.record(generation, budget.evaluations, len(archive), trained)
        generation += 1

    log.debug("%s finished: %d/%d targets, %d evaluations",
              config.algorithm, len(archive), archive.n_targets, budget.evaluations)
    return SearchResult(archive, events, budget.evaluations, trees)


def _lt_child(config, population, fos, catalog, pools, rng, fraction):
    max_len = config.max_test_length
    parent = tournament_selection(population, config.tournament_size, rng)
    if rng.random() < config.crossover_probability:
        donor = tournament_selection(population, config.tournament_size, rng)
        child = linkage_recombination(parent.test, donor.test, fos, catalog, rng, max_len)
        return mutate(child, fraction, catalog, pools, rng, max_len)
    return mutate(parent.test, fraction, catalog, pools, rng, max_len)


def _mosa_children(config, population, catalog, pools, rng):
    max_len = config.max_test_length
    a = tournament_selection(population, config.tournament_size, rng)
    b = tournament_selection(population, config.tournament_size, rng)
    if rng.random() < config.crossover_probability:
        c1, c2 = single_point_crossover(a.test, b.test, rng, max_len)
    else:
        c1, c2 = a.test, b.test
    return [mosa_mutate(c1, catalog, pools, rng, max_len), mosa_mutate(c2, catalog, pools, rng, max_len)]
