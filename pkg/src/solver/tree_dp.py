#!/usr/bin/env python3
"""
tree_dp.py

Exact partition of a spanning tree into k connected parts with centers.

The tree is rooted, then made binary by hanging excess children under dummy vertices.
Dummies cannot be centers, cost nothing to assign, and always stay in their parent's
part, so the feasible partitions are exactly the partitions of the original tree into k
connected subtrees.

State cost_u(j, c): best cost of splitting the subtree T_u into j parts where the part
containing u is served by center c (c may lie outside T_u; if it lies inside, it is in
u's part). For each node the table is a (k+1) x n slab, one column per candidate center,
so the per-child aggregates best_child(j) are computed once per (child, j).

Usage:
  from src.solver.mst import kruskal
  from src.solver.tree_dp import root_and_binarize, dp_cluster
  bt = root_and_binarize(kruskal(space), root_choice=0)
  clustering = dp_cluster(bt, space, objective, k=3)
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.config import tie_tolerance
from src.errors import InvalidParameterError
from src.metric.metric_core import MetricSpace
from src.objective.objectives import (
    Clustering,
    Mode,
    Objective,
    canonical_assignment,
    clustering_cost,
)
from src.solver.mst import SpanningTree, kruskal

logger = logging.getLogger(__name__)

# Which children start a new part; listed in tie-break order.
CASE_NO = 0  # every child joins the part of u
CASE_R = 1   # right child starts a new part
CASE_L = 2   # left (or only) child starts a new part
CASE_LR = 3  # both children start new parts
CASE_LEAF = 4


@dataclass(frozen=True)
class RootedBinaryTree:
    """
    Nodes 0..n-1 are the original points; dummies are numbered n..N-1 and map to the
    original vertex whose children they regroup.
    """
    n_points: int
    root: int
    parent: Tuple[int, ...]               # -1 at the root
    children: Tuple[Tuple[int, ...], ...]
    is_dummy: Tuple[bool, ...]
    orig_index: Tuple[int, ...]
    tin: np.ndarray                       # preorder entry time per node
    tout: np.ndarray                      # exclusive end of the node's preorder interval
    point_count: np.ndarray               # original points inside T_u
    postorder: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def dummy_count(self) -> int:
        return self.size - self.n_points

    def contains(self, u: int, point: int) -> bool:
        """point in T_u, by preorder interval."""
        return bool(self.tin[u] <= self.tin[point] < self.tout[u])

    def subtree_mask(self, u: int) -> np.ndarray:
        point_tin = self.tin[:self.n_points]
        return (point_tin >= self.tin[u]) & (point_tin < self.tout[u])

    def subtree_points(self, u: int) -> Tuple[int, ...]:
        return tuple(int(p) for p in np.flatnonzero(self.subtree_mask(u)))

    def part_limit(self, u: int) -> int:
        """
        Most parts T_u can be split into. A dummy's own part may hold no point of T_u
        (it continues into the parent), so a dummy allows one more than its point count.
        """
        return int(self.point_count[u]) + (1 if self.is_dummy[u] else 0)

    def real_parent(self, u: int) -> int:
        """Nearest non-dummy ancestor."""
        v = self.parent[u]
        while v >= 0 and self.is_dummy[v]:
            v = self.parent[v]
        return v

    def contract_edges(self) -> List[Tuple[int, int]]:
        """Edges of the original tree, recovered by merging dummies into their parents."""
        edges = []
        for u in range(self.n_points):
            if u == self.root:
                continue
            v = self.real_parent(u)
            edges.append((min(u, v), max(u, v)))
        return sorted(edges)


def root_and_binarize(t: SpanningTree, root_choice: int = 0) -> RootedBinaryTree:
    n = t.n
    if not 0 <= root_choice < n:
        raise InvalidParameterError(f"Root {root_choice} out of range for n={n}")

    parent = [-1] * n
    children: List[List[int]] = [[] for _ in range(n)]
    seen = [False] * n
    seen[root_choice] = True
    order = [root_choice]
    for v in order:
        for w in t.adjacency[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                children[v].append(w)
                order.append(w)

    is_dummy = [False] * n
    orig_index = list(range(n))
    for v in range(n):
        kids = children[v]
        while len(kids) > 2:
            first, second = kids[0], kids[1]
            dummy = len(parent)
            parent.append(v)
            children.append([first, second])
            is_dummy.append(True)
            orig_index.append(v)
            parent[first] = dummy
            parent[second] = dummy
            kids = kids[2:] + [dummy]
        children[v] = kids

    size = len(parent)
    tin = np.zeros(size, dtype=np.int64)
    tout = np.zeros(size, dtype=np.int64)
    point_count = np.zeros(size, dtype=np.int64)
    preorder = []
    stack = [root_choice]
    while stack:
        v = stack.pop()
        tin[v] = len(preorder)
        preorder.append(v)
        stack.extend(reversed(children[v]))
    postorder = tuple(reversed(preorder))
    for v in postorder:
        point_count[v] = (0 if is_dummy[v] else 1) + sum(point_count[c] for c in children[v])
        tout[v] = tin[v] + 1 + sum(tout[c] - tin[c] for c in children[v])

    bt = RootedBinaryTree(
        n_points=n,
        root=root_choice,
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
        is_dummy=tuple(is_dummy),
        orig_index=tuple(orig_index),
        tin=tin,
        tout=tout,
        point_count=point_count,
        postorder=postorder,
    )
    logger.debug("binarized tree: %d points, %d dummies, root %d", n, bt.dummy_count, root_choice)
    return bt


@dataclass
class DPTable:
    """
    Per-node slabs of cost_u(j, c) (kept only on request) plus backpointers:
    case[u][j, c] is one of CASE_*, split[u][j, c] the part count given to the left (or
    only) child; best[u, j] / best_center[u, j] aggregate over centers inside T_u.
    """
    k: int
    value: float
    root_costs: np.ndarray
    best: np.ndarray
    best_center: np.ndarray
    case: Dict[int, np.ndarray] = field(default_factory=dict)
    split: Dict[int, np.ndarray] = field(default_factory=dict)
    costs: Dict[int, np.ndarray] = field(default_factory=dict)


def _check_inputs(bt: RootedBinaryTree, m: MetricSpace, k: int):
    if bt.n_points != m.n:
        raise InvalidParameterError(f"Tree has {bt.n_points} points, metric has {m.n}")
    if not 1 <= k <= m.n:
        raise InvalidParameterError(f"k must be in [1, {m.n}], got {k}")


def _best_over_splits(left: np.ndarray, right: np.ndarray, splits: range, combine, shift):
    """
    min over the listed left counts j' of left[j'] (+) right[shift - j'];
    returns (values, chosen j') with the smallest j' winning ties.
    """
    if len(splits) == 0:
        return None, None
    stacked = np.stack([combine(left[s], right[shift - s]) for s in splits])
    pick = stacked.argmin(axis=0)
    values = np.take_along_axis(stacked, pick[None, :], axis=0)[0]
    return values, pick + splits.start


def build_dp_table(bt: RootedBinaryTree, m: MetricSpace, obj: Objective, k: int,
                   keep_choices: bool = True, keep_costs: bool = False) -> DPTable:
    _check_inputs(bt, m, k)
    n = m.n
    is_max = obj.mode is Mode.MAX
    f = obj.opening_costs(np.arange(n))
    g = obj.cost_matrix(m)
    inf = np.inf

    def plus(a, b):
        return np.maximum(a, b) if is_max else a + b

    def minus_f(values, times=1):
        return values if is_max else values - times * f

    best = np.full((bt.size, k + 1), inf)
    best_center = np.full((bt.size, k + 1), -1, dtype=np.int64)
    slabs: Dict[int, np.ndarray] = {}
    table = DPTable(k=k, value=inf, root_costs=np.full(n, inf), best=best, best_center=best_center)

    for u in bt.postorder:
        kids = bt.children[u]
        base = f.copy() if bt.is_dummy[u] else plus(f, g[u])
        cap = min(k, bt.part_limit(u))
        slab = np.full((k + 1, n), inf)
        case = np.full((k + 1, n), CASE_NO, dtype=np.int8)
        split = np.zeros((k + 1, n), dtype=np.int16)

        if not kids:
            slab[1] = base
            case[1] = CASE_LEAF
        elif len(kids) == 1:
            x = kids[0]
            cx = slabs[x]
            outside = ~bt.subtree_mask(x)
            x_can_split = not bt.is_dummy[x]
            for j in range(1, cap + 1):
                line = minus_f(cx[j]).copy()
                split[j] = j
                if x_can_split and j >= 2:
                    fresh = np.where(outside, best[x, j - 1], inf)
                    better = fresh < line
                    line = np.where(better, fresh, line)
                    case[j] = np.where(better, CASE_L, CASE_NO)
                    split[j] = np.where(better, j - 1, j)
                slab[j] = plus(base, line)
        else:
            left, right = kids
            cl, cr = slabs[left], slabs[right]
            nl, nr = bt.part_limit(left), bt.part_limit(right)
            in_l, in_r = bt.subtree_mask(left), bt.subtree_mask(right)
            l_can_split = not bt.is_dummy[left]
            r_can_split = not bt.is_dummy[right]
            for j in range(1, cap + 1):
                # (no): both children join, j' + j'' = j + 1
                no_splits = range(max(1, j + 1 - nr), min(nl, j) + 1)
                vals, picks = _best_over_splits(cl, cr, no_splits, plus, j + 1)
                line = np.full(n, inf) if vals is None else minus_f(vals, 2)
                chosen_case = np.full(n, CASE_NO, dtype=np.int8)
                chosen_split = np.zeros(n, dtype=np.int16) if picks is None else picks.astype(np.int16)

                one_new = range(max(1, j - nr), min(nl, j - 1) + 1)
                candidates = []
                if r_can_split and len(one_new):
                    # (r): left joins with j', right starts a part with j - j'
                    right_best = np.zeros((k + 1, n)) + best[right][:, None]
                    vals, picks = _best_over_splits(cl, right_best, one_new, plus, j)
                    candidates.append((CASE_R, np.where(in_r, inf, minus_f(vals)), picks))
                if l_can_split and len(one_new):
                    # (l): left starts a part with j', right joins with j - j'
                    left_best = np.zeros((k + 1, n)) + best[left][:, None]
                    vals, picks = _best_over_splits(left_best, cr, one_new, plus, j)
                    candidates.append((CASE_L, np.where(in_l, inf, minus_f(vals)), picks))
                both_new = range(max(1, j - 1 - nr), min(nl, j - 2) + 1)
                if l_can_split and r_can_split and len(both_new):
                    # (lr): both start parts, j' + j'' = j - 1
                    sums = [plus(best[left, s], best[right, j - 1 - s]) for s in both_new]
                    pick = int(np.argmin(sums))
                    vals = np.where(in_l | in_r, inf, sums[pick])
                    candidates.append((CASE_LR, vals, np.full(n, both_new.start + pick)))

                for code, vals, picks in candidates:
                    better = vals < line
                    line = np.where(better, vals, line)
                    chosen_case = np.where(better, code, chosen_case).astype(np.int8)
                    chosen_split = np.where(better, picks, chosen_split).astype(np.int16)
                slab[j] = plus(base, line)
                case[j] = chosen_case
                split[j] = chosen_split

        mask = bt.subtree_mask(u)
        inside = np.flatnonzero(mask)
        for j in range(1, cap + 1):
            values = slab[j, inside]
            pick = int(np.argmin(values))
            best[u, j] = values[pick]
            best_center[u, j] = inside[pick] if np.isfinite(values[pick]) else -1

        slabs[u] = slab
        for child in kids:
            if keep_costs:
                table.costs[child] = slabs[child]
            del slabs[child]
        if keep_choices:
            table.case[u] = case
            table.split[u] = split

    root_slab = slabs.pop(bt.root)
    if keep_costs:
        table.costs[bt.root] = root_slab
    table.root_costs = root_slab[k].copy()
    table.value = float(best[bt.root, k])
    logger.debug("dp table: N=%d k=%d value=%.12g", bt.size, k, table.value)
    return table


def _reconstruct(bt: RootedBinaryTree, table: DPTable) -> np.ndarray:
    """Center serving each original point, following the backpointers from the root."""
    center_of = np.full(bt.n_points, -1, dtype=np.int64)
    bc = table.best_center
    stack = [(bt.root, table.k, int(bc[bt.root, table.k]))]
    while stack:
        u, j, c = stack.pop()
        if not bt.is_dummy[u]:
            center_of[u] = c
        kids = bt.children[u]
        if not kids:
            continue
        code = int(table.case[u][j, c])
        s = int(table.split[u][j, c])
        if len(kids) == 1:
            x = kids[0]
            stack.append((x, j, c) if code == CASE_NO else (x, s, int(bc[x, s])))
            continue
        left, right = kids
        if code == CASE_NO:
            stack += [(left, s, c), (right, j + 1 - s, c)]
        elif code == CASE_R:
            stack += [(left, s, c), (right, j - s, int(bc[right, j - s]))]
        elif code == CASE_L:
            stack += [(left, s, int(bc[left, s])), (right, j - s, c)]
        else:
            stack += [(left, s, int(bc[left, s])), (right, j - 1 - s, int(bc[right, j - 1 - s]))]
    return center_of


def dp_cluster(bt: RootedBinaryTree, m: MetricSpace, obj: Objective, k: int) -> Clustering:
    """Optimal partition of the tree into k connected parts, as a Clustering of m."""
    table = build_dp_table(bt, m, obj, k, keep_choices=True)
    if not np.isfinite(table.value):
        raise InvalidParameterError(f"No partition into {k} parts exists")
    center_of = _reconstruct(bt, table)
    assignment = canonical_assignment(center_of.tolist())
    recomputed, centers = clustering_cost(assignment, m, obj)
    if abs(recomputed - table.value) > tie_tolerance(table.value):
        raise RuntimeError(
            f"DP value {table.value!r} disagrees with recomputed clustering cost {recomputed!r}"
        )
    return Clustering(assignment, centers, table.value)


def dp_cost_only(bt: RootedBinaryTree, m: MetricSpace, obj: Objective, k: int) -> float:
    return build_dp_table(bt, m, obj, k, keep_choices=False).value


def cluster_exact(m: MetricSpace, obj: Objective, k: int, root: int = 0) -> Clustering:
    """Kruskal tree, binarize at `root`, run the DP."""
    logger.info("clustering %d points into %d parts (%s)", m.n, k, obj.name)
    return dp_cluster(root_and_binarize(kruskal(m), root), m, obj, k)
