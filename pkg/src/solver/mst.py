#!/usr/bin/env python3
"""
mst.py

Kruskal minimum spanning tree over the complete graph of a metric space.

Edges are considered in the total order (weight, smaller endpoint, larger endpoint), so
the tree is fully determined by the matrix. The same merge sequence, stopped early,
gives the single-linkage clustering.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from src.errors import ClusteringError
from src.metric.metric_core import MetricSpace

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]


class UnionFind:
    """Disjoint sets over 0..n-1 with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, x: int) -> int:
        root = x
        while root != self.parent[root]:
            root = self.parent[root]
        while x != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.components -= 1
        return True


@dataclass(frozen=True)
class SpanningTree:
    n: int
    edges: Tuple[Edge, ...]  # (i, j, weight) with i < j, in insertion order
    adjacency: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.edges) != self.n - 1:
            raise ClusteringError(f"A spanning tree on {self.n} points has {self.n - 1} edges, got {len(self.edges)}")

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[Edge]) -> "SpanningTree":
        neighbors: List[List[int]] = [[] for _ in range(n)]
        normalized = []
        for i, j, w in edges:
            i, j = (int(i), int(j)) if i < j else (int(j), int(i))
            normalized.append((i, j, float(w)))
            neighbors[i].append(j)
            neighbors[j].append(i)
        return cls(n, tuple(normalized), tuple(tuple(sorted(adj)) for adj in neighbors))

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))


def _sorted_pairs(m: MetricSpace) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(m.n, k=1)
    weights = m.dist[rows, cols]
    order = np.lexsort((cols, rows, weights))
    return rows[order], cols[order], weights[order]


def _kruskal_merges(m: MetricSpace, stop_at: int) -> Iterator[Tuple[Edge, UnionFind]]:
    """Yield accepted edges in order until `stop_at` components remain."""
    forest = UnionFind(m.n)
    if forest.components <= stop_at:
        return
    rows, cols, weights = _sorted_pairs(m)
    for i, j, w in zip(rows.tolist(), cols.tolist(), weights.tolist()):
        if forest.union(i, j):
            yield (i, j, w), forest
            if forest.components <= stop_at:
                return


def kruskal(m: MetricSpace) -> SpanningTree:
    edges = [edge for edge, _ in _kruskal_merges(m, stop_at=1)]
    tree = SpanningTree.from_edges(m.n, edges)
    logger.debug("kruskal: %d points, total weight %.6g", m.n, tree.total_weight)
    return tree


def single_linkage_components(m: MetricSpace, k: int) -> Tuple[int, ...]:
    """Component label (root index) per point after n-k Kruskal merges."""
    forest = UnionFind(m.n)
    for _, forest in _kruskal_merges(m, stop_at=k):
        pass
    return tuple(forest.find(p) for p in range(m.n))


def is_subtree_connected(t: SpanningTree, members) -> bool:
    """True iff the tree restricted to `members` is connected."""
    nodes = set(int(v) for v in members)
    if not nodes:
        raise ClusteringError("Member set is empty")
    if any(not 0 <= v < t.n for v in nodes):
        raise ClusteringError(f"Member index out of range for n={t.n}")
    start = min(nodes)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in t.adjacency[v]:
            if w in nodes and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(nodes)
