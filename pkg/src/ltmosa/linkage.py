"""Linkage learning over HTTP actions.

Tests are encoded as presence bitmaps over the action catalog; pairwise mutual
information between action columns drives an average-linkage (UPGMA)
agglomerative clustering whose internal nodes form the family of subsets used
by linkage-based recombination.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .api_model import TestCase


class ModelUnavailable(ValueError):
    """Not enough data to learn a linkage model this generation."""


def encode(test: TestCase, n_actions: int) -> np.ndarray:
    """Presence bitmap of length ``n_actions`` (1 iff the action occurs in ``test``)."""
    bits = np.zeros(n_actions, dtype=np.uint8)
    for stmt in test.statements:
        bits[stmt.action] = 1
    return bits


def encode_population(tests: Sequence[TestCase], n_actions: int) -> np.ndarray:
    """Stack encodings into an ``(len(tests), n_actions)`` matrix."""
    out = np.zeros((len(tests), n_actions), dtype=np.uint8)
    for row, test in enumerate(tests):
        for stmt in test.statements:
            out[row, stmt.action] = 1
    return out


def _entropy_from_counts(counts: Sequence[int], total: int) -> float:
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def entropy(column: Sequence[int]) -> float:
    """Shannon entropy in bits of a binary column."""
    col = np.asarray(column)
    if col.size == 0:
        raise ValueError("entropy of an empty column")
    ones = int(np.count_nonzero(col))
    return _entropy_from_counts((ones, col.size - ones), col.size)


def mutual_information(col_i: Sequence[int], col_j: Sequence[int]) -> float:
    """``H(i) + H(j) - H(i, j)`` from empirical frequencies, clamped at 0."""
    a = np.asarray(col_i).astype(bool)
    b = np.asarray(col_j).astype(bool)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("columns must be non-empty and of equal length")
    n = a.size
    n11 = int(np.count_nonzero(a & b))
    n1_ = int(np.count_nonzero(a))
    n_1 = int(np.count_nonzero(b))
    return _mi_from_counts(n, n1_, n_1, n11)


def _mi_from_counts(n: int, n1_: int, n_1: int, n11: int) -> float:
    # symmetric in (n1_, n_1): the joint cells are summed in a fixed order
    n10 = n1_ - n11
    n01 = n_1 - n11
    n00 = n - n1_ - n_1 + n11
    h_i = _entropy_from_counts((n1_, n - n1_), n)
    h_j = _entropy_from_counts((n_1, n - n_1), n)
    h_ij = _entropy_from_counts((n00, min(n01, n10), max(n01, n10), n11), n)
    mi = (h_i + h_j) - h_ij if h_i <= h_j else (h_j + h_i) - h_ij
    return max(mi, 0.0)


def mutual_information_matrix(encoded: np.ndarray) -> np.ndarray:
    """Pairwise MI between all action columns of an encoded population."""
    enc = np.asarray(encoded).astype(np.int64)
    n, k = enc.shape
    ones = enc.sum(axis=0)
    joint = enc.T @ enc
    mi = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            mi[i, j] = mi[j, i] = _mi_from_counts(n, int(ones[i]), int(ones[j]), int(joint[i, j]))
    return mi


def mi_distance_matrix(mi: np.ndarray) -> np.ndarray:
    """``1 - MI / max(MI)`` off the diagonal; all ones when every MI is zero."""
    k = mi.shape[0]
    off = mi[~np.eye(k, dtype=bool)]
    top = float(off.max()) if off.size else 0.0
    dist = np.ones((k, k)) if top <= 0.0 else 1.0 - mi / top
    np.fill_diagonal(dist, 0.0)
    return dist


# ---------------------------------------------------------------------------
# UPGMA


@dataclass(frozen=True)
class LinkageNode:
    members: frozenset[int]
    height: float
    left: Optional[LinkageNode] = None
    right: Optional[LinkageNode] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_json(self) -> dict:
        out = {"members": sorted(self.members), "height": self.height}
        if not self.is_leaf:
            out["children"] = [self.left.to_json(), self.right.to_json()]
        return out


@dataclass(frozen=True)
class LinkageTree:
    root: LinkageNode
    merges: tuple[LinkageNode, ...]  # internal nodes in merge order
    leaves: tuple[LinkageNode, ...]

    @property
    def size(self) -> int:
        return len(self.leaves)

    def nodes(self) -> list[LinkageNode]:
        return list(self.leaves) + list(self.merges)

    def dumps(self) -> str:
        return json.dumps(self.root.to_json(), indent=2)


def upgma(dist: np.ndarray) -> LinkageTree:
    """Average-linkage agglomerative clustering of a symmetric distance matrix.

    Among equally close cluster pairs, the pair whose smaller minimum member
    index is lowest wins, then the pair whose other minimum member is lowest.
    Cluster distances are kept as sums of member distances so that the
    average is one division away from the raw matrix.
    """
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    if n < 1 or d.shape != (n, n):
        raise ValueError("distance matrix must be square and non-empty")
    leaves = tuple(LinkageNode(frozenset([i]), 0.0) for i in range(n))
    # clusters are keyed by their minimum member index
    active: dict[int, LinkageNode] = {i: leaves[i] for i in range(n)}
    sums = {(i, j): float(d[i, j]) for i in range(n) for j in range(i + 1, n)}
    merges = []
    while len(active) > 1:
        keys = sorted(active)
        best = None
        best_pair = None
        for x in range(len(keys)):
            a = keys[x]
            na = len(active[a].members)
            for y in range(x + 1, len(keys)):
                b = keys[y]
                avg = sums[(a, b)] / (na * len(active[b].members))
                if best is None or avg < best:
                    best, best_pair = avg, (a, b)
        a, b = best_pair
        node = LinkageNode(active[a].members | active[b].members, best, active[a], active[b])
        del active[b]
        active[a] = node
        for c in active:
            if c == a:
                continue
            ka, kb = (min(a, c), max(a, c)), (min(b, c), max(b, c))
            sums[ka] = sums[ka] + sums.pop(kb)
        merges.append(node)
    return LinkageTree(active[min(active)], tuple(merges), leaves)


def train_linkage_tree(front: Sequence[np.ndarray] | np.ndarray) -> LinkageTree:
    """Learn a linkage tree from encoded tests (rows) of the first front.

    Raises:
        ModelUnavailable: with fewer than two tests or fewer than two actions.
    """
    enc = np.asarray(front)
    if enc.ndim != 2 or enc.shape[0] < 2:
        raise ModelUnavailable("need at least two encoded tests")
    if enc.shape[1] < 2:
        raise ModelUnavailable("need at least two actions")
    return upgma(mi_distance_matrix(mutual_information_matrix(enc)))


def extract_fos(tree: LinkageTree) -> list[frozenset[int]]:
    """Internal-node subsets except the root, in merge order."""
    return [node.members for node in tree.merges if node is not tree.root]


def donor_subsets(donor: np.ndarray | Sequence[int], fos: Sequence[frozenset[int]]) -> list[frozenset[int]]:
    """Subsets whose actions are all present in the donor encoding."""
    bits = np.asarray(donor)
    return [s for s in fos if all(bits[i] for i in s)]
