"""Randomized structural properties (500 generated cases per property)."""

import json
import random

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from builders import individual, listing_catalog, make_test
from ltmosa.harness.simulated import SimulatedSut, builtin_scenario_path
from ltmosa.linkage import extract_fos, train_linkage_tree
from ltmosa.search import SearchConfig, run_search
from ltmosa.search.operators import linkage_recombination
from ltmosa.search.sorting import preference_sorting

CATALOG = listing_catalog()
CASES = settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def fronts(draw):
    n_actions = draw(st.integers(2, 8))
    n_tests = draw(st.integers(2, 32))
    bits = draw(st.lists(st.lists(st.integers(0, 1), min_size=n_actions, max_size=n_actions),
                         min_size=n_tests, max_size=n_tests))
    return np.array(bits, dtype=np.uint8)


# ---------------------------------------------------------------------------
# linkage model


@CASES
@given(fronts())
def test_linkage_tree_node_invariants(front):
    tree = train_linkage_tree(front)
    n = front.shape[1]
    assert len(tree.leaves) == n and len(tree.merges) == n - 1
    assert [leaf.members for leaf in tree.leaves] == [frozenset({i}) for i in range(n)]
    assert tree.root.members == frozenset(range(n))
    for node in tree.merges:
        assert not (node.left.members & node.right.members)
        assert node.left.members | node.right.members == node.members
        assert node.height >= node.left.height and node.height >= node.right.height
    heights = [node.height for node in tree.merges]
    assert heights == sorted(heights)


@CASES
@given(fronts())
def test_fos_is_laminar(front):
    fos = extract_fos(train_linkage_tree(front))
    n = front.shape[1]
    assert len(fos) == n - 2
    for i, a in enumerate(fos):
        assert 2 <= len(a) <= n - 1
        for b in fos[i + 1:]:
            assert not (a & b) or a <= b or b <= a


# ---------------------------------------------------------------------------
# sorting


@st.composite
def populations(draw):
    n_targets = draw(st.integers(1, 6))
    distance = st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0]) | st.floats(0.0, 1.0)
    pop = draw(st.lists(
        st.tuples(st.lists(distance, min_size=n_targets, max_size=n_targets), st.integers(1, 6)),
        min_size=1, max_size=20))
    uncovered = draw(st.lists(st.integers(0, n_targets - 1), unique=True))
    return [individual(objs, length) for objs, length in pop], sorted(uncovered)


@CASES
@given(populations())
def test_front_zero_holds_a_minimum_for_every_uncovered_target(case):
    pop, uncovered = case
    fronts = preference_sorting(pop, uncovered)
    assert sorted(map(id, (ind for f in fronts for ind in f))) == sorted(map(id, pop))
    if not uncovered:
        return
    for t in uncovered:
        best = min(ind.objectives[t] for ind in pop)
        assert min(ind.objectives[t] for ind in fronts[0]) == best
        shortest = min(len(ind) for ind in pop if ind.objectives[t] == best)
        assert any(ind.objectives[t] == best and len(ind) == shortest for ind in fronts[0])


# ---------------------------------------------------------------------------
# recombination


def _is_subsequence(short, long):
    it = iter(long)
    return all(any(x == y for y in it) for x in short)


@CASES
@given(
    st.lists(st.integers(0, 3), min_size=1, max_size=12),
    st.lists(st.integers(0, 3), min_size=1, max_size=12),
    st.lists(st.frozensets(st.integers(0, 3), min_size=2, max_size=3), max_size=4),
    st.integers(0, 2**32 - 1),
)
def test_offspring_keeps_parent_as_subsequence(parent, donor, fos, seed):
    parent_test, donor_test = make_test(*parent), make_test(*donor)
    child = linkage_recombination(parent_test, donor_test, fos, CATALOG, random.Random(seed), max_len=100)
    if any(all(a in donor for a in s) for s in fos):
        assert _is_subsequence(parent_test.statements, child.statements)
        assert len(child) > len(parent_test)
    else:
        # crossover fallback keeps the parent's prefix up to the cut point
        cut = next(i for i in range(len(parent), 0, -1) if child.statements[:i] == parent_test.statements[:i])
        assert child.statements[:cut] == parent_test.statements[:cut]


def test_subsequence_helper():
    assert _is_subsequence([1, 2], [1, 3, 2])
    assert not _is_subsequence([2, 1], [1, 3, 2])


# ---------------------------------------------------------------------------
# whole runs


class RecordingSut(SimulatedSut):
    """Remembers the length and covered targets of every executed test."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.seen = []

    def execute(self, test):
        result = super().execute(test)
        self.seen.append((len(test), result.covered))
        return result


SCENARIO = json.loads(builtin_scenario_path("fault-maze").read_text())


def _tiny_config(algorithm, seed):
    return SearchConfig(algorithm=algorithm, seed=seed, max_evaluations=60, population_size=6,
                        tournament_size=2, linkage_frequency=2, mio_capacity=3)


runs = st.tuples(st.sampled_from(["mio", "mosa", "lt-mosa"]), st.integers(0, 2**31 - 1))


@CASES
@given(runs)
def test_archive_is_monotone_and_minimal(run):
    algorithm, seed = run
    sut = RecordingSut(SCENARIO)
    result = run_search(_tiny_config(algorithm, seed), sut)
    counts = [r["covered_count"] for r in result.events.records]
    assert counts == sorted(counts)
    assert counts[-1] == len(result.archive)
    for target, stored in result.archive.best.items():
        assert stored.objectives[target] == 0.0 and target in stored.covered
        assert len(stored) == min(length for length, covered in sut.seen if target in covered)
    reached = set().union(*(covered for _, covered in sut.seen))
    assert reached == result.archive.covered()


@CASES
@given(runs)
def test_same_seed_gives_same_archive_and_log(run):
    algorithm, seed = run
    outcomes = []
    for _ in range(2):
        result = run_search(_tiny_config(algorithm, seed), SimulatedSut(SCENARIO))
        archived = [(t, ind.test, ind.faults) for t, ind in sorted(result.archive.best.items())]
        outcomes.append((result.events.without_timestamps(), archived))
    assert outcomes[0] == outcomes[1]
