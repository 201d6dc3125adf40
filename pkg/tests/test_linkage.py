import itertools
import random

import numpy as np
import pytest

from builders import make_test
from oracles import joint_table_mi, naive_upgma
from ltmosa.linkage import (
    ModelUnavailable,
    donor_subsets,
    encode,
    encode_population,
    entropy,
    extract_fos,
    mi_distance_matrix,
    mutual_information,
    mutual_information_matrix,
    train_linkage_tree,
    upgma,
)


def test_encode_examples():
    assert encode(make_test(0, 1, 2, 3), 4).tolist() == [1, 1, 1, 1]
    assert encode(make_test(2), 4).tolist() == [0, 0, 1, 0]
    assert encode(make_test(1, 1, 1), 4).tolist() == [0, 1, 0, 0]
    pop = encode_population([make_test(0), make_test(3, 3)], 4)
    assert pop.tolist() == [[1, 0, 0, 0], [0, 0, 0, 1]]


def test_entropy_examples():
    assert entropy([0, 0, 0, 0]) == 0.0
    assert entropy([0, 1, 0, 1]) == 1.0
    assert entropy([1, 0, 0, 0]) == pytest.approx(0.8112781244591328, abs=1e-12)


def test_mutual_information_examples():
    col = [0, 1, 1, 0]
    assert mutual_information(col, col) == pytest.approx(1.0)
    assert mutual_information([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0
    # joint counts (0,0):2, (0,1):1, (1,0):1, (1,1):2
    x = [0, 0, 0, 1, 1, 1]
    y = [0, 0, 1, 0, 1, 1]
    assert mutual_information(x, y) == pytest.approx(joint_table_mi(x, y), abs=1e-12)
    assert mutual_information(x, y) == pytest.approx(0.08170416594551044, abs=1e-12)


def test_mutual_information_is_symmetric_and_bounded():
    rng = random.Random(4)
    for _ in range(300):
        n = rng.randint(1, 12)
        a = [rng.randint(0, 1) for _ in range(n)]
        b = [rng.randint(0, 1) for _ in range(n)]
        mi = mutual_information(a, b)
        assert mi == mutual_information(b, a)
        assert 0.0 <= mi <= min(entropy(a), entropy(b)) + 1e-9


def test_mi_matrix_matches_pairwise_calls():
    enc = np.array([[1, 0, 1], [1, 1, 0], [0, 1, 1], [1, 1, 1]])
    mi = mutual_information_matrix(enc)
    for i, j in itertools.permutations(range(3), 2):
        assert mi[i, j] == mutual_information(enc[:, i], enc[:, j])


def test_distance_matrix_scaling_and_fallback():
    mi = np.array([[0.0, 0.5, 0.25], [0.5, 0.0, 0.0], [0.25, 0.0, 0.0]])
    d = mi_distance_matrix(mi)
    assert d[0, 1] == 0.0 and d[0, 2] == 0.5 and d[1, 2] == 1.0
    assert np.all(np.diag(d) == 0.0)
    flat = mi_distance_matrix(np.zeros((3, 3)))
    assert flat[0, 1] == flat[1, 2] == 1.0


def test_two_actions_give_root_over_leaves():
    tree = train_linkage_tree(np.array([[1, 0], [0, 1], [1, 1]]))
    assert tree.root.members == {0, 1}
    assert tree.root.left.is_leaf and tree.root.right.is_leaf
    assert extract_fos(tree) == []


def test_paired_blocks_merge_first():
    rows = [[a, a, b, b] for a, b in ((0, 0), (0, 1), (1, 0), (1, 1), (1, 1), (0, 0))]
    tree = train_linkage_tree(np.array(rows))
    assert [m.members for m in tree.merges[:2]] == [frozenset({0, 1}), frozenset({2, 3})]
    assert tree.root.members == {0, 1, 2, 3}
    assert set(extract_fos(tree)) == {frozenset({0, 1}), frozenset({2, 3})}


def test_three_actions_give_one_subset():
    tree = train_linkage_tree(np.array([[1, 1, 0], [0, 0, 1], [1, 1, 1]]))
    assert len(extract_fos(tree)) == 1


def test_model_unavailable_for_tiny_fronts():
    with pytest.raises(ModelUnavailable):
        train_linkage_tree(np.array([[1, 0, 1]]))
    with pytest.raises(ModelUnavailable):
        train_linkage_tree(np.array([[1], [0]]))


def test_donor_subsets_examples():
    fos = [frozenset({0, 1}), frozenset({2, 3})]
    assert donor_subsets([1, 1, 0, 0], fos) == [frozenset({0, 1})]
    assert donor_subsets([0, 0, 0, 0], fos) == []
    assert donor_subsets([1, 1, 1, 1], fos) == fos


def _as_merges(tree):
    return [(n.left.members, n.right.members, n.height) for n in tree.merges]


@pytest.mark.parametrize("grid", [4, 1024])
def test_upgma_agrees_with_naive_oracle(grid):
    # values on a dyadic grid keep every sum exact, so heights compare with ==
    rng = random.Random(grid)
    for _ in range(100):
        n = rng.randint(1, 8)
        d = np.zeros((n, n))
        for i, j in itertools.combinations(range(n), 2):
            d[i, j] = d[j, i] = rng.randint(0, grid) / grid
        assert _as_merges(upgma(d)) == naive_upgma(d.tolist())


def test_upgma_continuous_values_within_rounding():
    rng = random.Random(8)
    for _ in range(50):
        n = rng.randint(2, 8)
        d = np.zeros((n, n))
        for i, j in itertools.combinations(range(n), 2):
            d[i, j] = d[j, i] = rng.random()
        ours, ref = _as_merges(upgma(d)), naive_upgma(d.tolist())
        assert [m[:2] for m in ours] == [m[:2] for m in ref]
        assert [m[2] for m in ours] == pytest.approx([m[2] for m in ref], abs=1e-12)


def test_degenerate_front_still_builds_a_tree():
    tree = train_linkage_tree(np.ones((5, 4), dtype=np.uint8))
    assert tree.root.members == {0, 1, 2, 3}
    assert len(tree.merges) == 3


def test_tree_dump_is_nested_json():
    import json

    tree = train_linkage_tree(np.array([[1, 1, 0], [0, 0, 1], [1, 1, 1]]))
    doc = json.loads(tree.dumps())
    assert doc["members"] == [0, 1, 2]
    assert len(doc["children"]) == 2
