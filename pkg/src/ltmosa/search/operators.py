"""Variation operators on test cases."""

from __future__ import annotations

import random
from collections.abc import Sequence
from typing import Optional

from ..api_model import (
    ActionCatalog,
    ActionInstance,
    LiteralPools,
    TestCase,
    sample_instance,
    sample_value,
)
from ..linkage import donor_subsets, encode


def single_point_crossover(a: TestCase, b: TestCase, rng: random.Random,
                           max_len: int = 40) -> tuple[TestCase, TestCase]:
    """Swap the tails of two tests after cut points drawn from ``[1, len]``."""
    ca = rng.randint(1, len(a))
    cb = rng.randint(1, len(b))
    sa, sb = a.statements, b.statements
    first = sa[:ca] + sb[cb:]
    second = sb[:cb] + sa[ca:]
    return TestCase(first[:max_len]), TestCase(second[:max_len])


def linkage_recombination(parent: TestCase, donor: TestCase, fos: Optional[Sequence[frozenset[int]]],
                          catalog: ActionCatalog, rng: random.Random, max_len: int = 40) -> TestCase:
    """Copy ``parent`` and inject one linkage subset's statements from ``donor``.

    The donor's statements whose actions belong to a randomly chosen subset
    (among those fully present in the donor) are inserted as one contiguous
    block, in donor order, at a random position. Without a model or matching
    subset the first child of a single-point crossover is returned.
    """
    matches = donor_subsets(encode(donor, len(catalog)), fos) if fos else []
    if not matches:
        return single_point_crossover(parent, donor, rng, max_len)[0]
    subset = matches[rng.randrange(len(matches))]
    block = tuple(s for s in donor.statements if s.action in subset)
    at = rng.randint(0, len(parent))
    stmts = parent.statements[:at] + block + parent.statements[at:]
    return TestCase(stmts[:max_len])


# ---------------------------------------------------------------------------
# mutation


def mutation_count(budget_fraction: float) -> int:
    """Number of elementary mutations: 1 at the start of the search, 10 at the end."""
    return round(1 + 9 * min(1.0, max(0.0, budget_fraction)))


def _random_instance(catalog, pools, rng, prefix) -> ActionInstance:
    return sample_instance(catalog[rng.randrange(len(catalog))], rng, pools, prefix)


def _structural(stmts: list[ActionInstance], catalog, pools, rng, max_len: int) -> None:
    ops = ["add", "delete", "replace"]
    if len(stmts) <= 1:
        ops.remove("delete")
    if len(stmts) >= max_len:
        ops.remove("add")
    op = rng.choice(ops)
    if op == "add":
        at = rng.randint(0, len(stmts))
        stmts.insert(at, _random_instance(catalog, pools, rng, stmts[:at]))
    elif op == "delete":
        del stmts[rng.randrange(len(stmts))]
    else:
        at = rng.randrange(len(stmts))
        stmts[at] = _random_instance(catalog, pools, rng, stmts[:at])


def _mutate_data(stmts: list[ActionInstance], at: int, catalog, pools, rng) -> None:
    stmt = stmts[at]
    gene = stmt.inputs[rng.randrange(len(stmt.inputs))]
    schema = next(p for p in catalog[stmt.action].params if p.name == gene.name)
    stmts[at] = stmt.with_input(gene.name, sample_value(schema.value_type, rng, pools, stmts[:at]))


def mutate(test: TestCase, budget_fraction: float, catalog: ActionCatalog,
           pools: LiteralPools, rng: random.Random, max_len: int = 40) -> TestCase:
    """Apply ``mutation_count(budget_fraction)`` elementary mutations.

    Each one is, with equal probability, a structural change (add, delete or
    replace a statement) or a re-sampled input on a random statement.
    """
    stmts = list(test.statements)
    for _ in range(mutation_count(budget_fraction)):
        with_inputs = [i for i, s in enumerate(stmts) if s.inputs]
        if rng.random() < 0.5 or not with_inputs:
            _structural(stmts, catalog, pools, rng, max_len)
        else:
            _mutate_data(stmts, with_inputs[rng.randrange(len(with_inputs))], catalog, pools, rng)
    return TestCase(tuple(stmts[:max_len]))


def mosa_mutate(test: TestCase, catalog: ActionCatalog, pools: LiteralPools, rng: random.Random,
                max_len: int = 40) -> TestCase:
    """Uniform mutation: every statement changes with probability ``1/len``.

    A selected statement gets a structural change (delete, replace, or insert
    a new statement after it) or an input change, each with probability 1/2.
    """
    n = len(test)
    p = 1.0 / n
    out: list[ActionInstance] = []
    for stmt in test.statements:
        if rng.random() >= p:
            out.append(stmt)
            continue
        if rng.random() < 0.5 or not stmt.inputs:
            ops = ["delete", "replace", "insert"]
            # n tracks the current length of the mutated test
            if n <= 1:
                ops.remove("delete")
            if n >= max_len:
                ops.remove("insert")
            op = rng.choice(ops)
            if op == "delete":
                n -= 1
            elif op == "replace":
                out.append(_random_instance(catalog, pools, rng, out))
            else:
                out.append(stmt)
                out.append(_random_instance(catalog, pools, rng, out))
                n += 1
        else:
            out.append(stmt)
            _mutate_data(out, len(out) - 1, catalog, pools, rng)
    return TestCase(tuple(out[:max_len]))
