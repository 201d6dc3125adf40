"""Preference sorting, non-dominated fronts and selection for the MOSA family."""

from __future__ import annotations

import random
from collections.abc import Sequence

import numpy as np

from .core import Individual


def dominance_matrix(objs: np.ndarray) -> np.ndarray:
    """``dom[i, j]`` is True when row ``i`` Pareto-dominates row ``j`` (minimization)."""
    le = (objs[:, None, :] <= objs[None, :, :]).all(axis=2)
    lt = (objs[:, None, :] < objs[None, :, :]).any(axis=2)
    return le & lt


def fast_non_dominated_sort(objs: np.ndarray) -> list[list[int]]:
    """Partition row indices into successive non-dominated fronts."""
    n = objs.shape[0]
    if n == 0:
        return []
    dom = dominance_matrix(objs)
    remaining = np.ones(n, dtype=bool)
    fronts = []
    while remaining.any():
        dominated = (dom[remaining][:, remaining]).any(axis=0)
        idx = np.flatnonzero(remaining)
        front = idx[~dominated]
        fronts.append(front.tolist())
        remaining[front] = False
    return fronts


def preference_sorting(population: Sequence[Individual], uncovered: Sequence[int]) -> list[list[Individual]]:
    """Rank a population into fronts and set each individual's ``rank``.

    Front 0 holds, for every uncovered target, the individual with the lowest
    distance (ties: shorter test, then lower population index). The rest are
    split by non-dominated sorting on the uncovered objectives.
    """
    if not population:
        raise ValueError("cannot sort an empty population")
    if not uncovered:
        for ind in population:
            ind.rank = 0
        return [list(population)]
    cols = np.asarray(uncovered)
    objs = np.array([ind.objectives for ind in population])[:, cols]
    lengths = np.array([len(ind) for ind in population])

    mins = objs.min(axis=0)
    best = set()
    for k in range(objs.shape[1]):
        cand = np.flatnonzero(objs[:, k] == mins[k])
        best.add(int(cand[np.argmin(lengths[cand])]) if cand.size > 1 else int(cand[0]))
    first = sorted(best)
    rest = np.array([i for i in range(len(population)) if i not in best], dtype=int)

    fronts_idx = [first]
    if rest.size:
        sub = objs[rest]
        # constant columns never decide dominance
        varying = (sub != sub[:1]).any(axis=0)
        sub = sub[:, varying] if varying.any() else sub[:, :1]
        for front in fast_non_dominated_sort(sub):
            fronts_idx.append(sorted(int(rest[i]) for i in front))

    fronts = []
    for rank, front in enumerate(fronts_idx):
        members = [population[i] for i in front]
        for ind in members:
            ind.rank = rank
        fronts.append(members)
    return fronts


def environmental_selection(fronts: Sequence[Sequence[Individual]], size: int) -> list[Individual]:
    """Fill the next population front by front; the last front is cut in order."""
    chosen: list[Individual] = []
    for front in fronts:
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
        else:
            chosen.extend(front[: size - len(chosen)])
        if len(chosen) >= size:
            break
    return chosen


def tournament_selection(population: Sequence[Individual], tournament_size: int, rng: random.Random) -> Individual:
    """Best of ``tournament_size`` draws with replacement: lowest rank, then shortest."""
    if not population:
        raise ValueError("empty population")
    winner = None
    for _ in range(tournament_size):
        cand = population[rng.randrange(len(population))]
        if winner is None or (cand.rank, len(cand)) < (winner.rank, len(winner)):
            winner = cand
    return winner
