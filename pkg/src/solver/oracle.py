#!/usr/bin/env python3
"""
oracle.py

Exhaustive exact solvers used as ground truth at desk scale.

brute_force_optimal scores every partition of the points into exactly k blocks. Each block
score is looked up in a table holding the best single-cluster score of every subset
(bitmask), so a partition costs k lookups. Partitions are enumerated as restricted-growth
strings (first occurrence order), which is already the canonical form used for comparison.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from src.config import get_settings, tie_tolerance
from src.errors import InvalidParameterError, ObjectiveError, OracleCapExceeded
from src.metric.metric_core import MetricSpace
from src.objective.objectives import Mode, Objective, canonical_assignment
from src.solver.mst import UnionFind
from src.solver.tree_dp import RootedBinaryTree

logger = logging.getLogger(__name__)

MAX_LISTED = 100
SCORE_CHUNK = 1 << 16


class OracleResult(BaseModel):
    method: str
    n: int
    k: int
    optimal_cost: float
    optimal_partitions: List[List[int]]  # canonical 1-based assignments, sorted
    num_optimal: int
    unique: bool
    evaluated: int


def _check_k(n: int, k: int):
    if not 1 <= k <= n:
        raise InvalidParameterError(f"k must be in [1, {n}], got {k}")


def _check_cap(n: int, cap: int, what: str):
    if n > cap:
        raise OracleCapExceeded(f"{what} is limited to n <= {cap}, got n={n}")


def subset_scores(m: MetricSpace, obj: Objective) -> np.ndarray:
    """Best single-cluster score of every non-empty subset, indexed by bitmask (inf for 0)."""
    n = m.n
    masks = np.arange(1 << n, dtype=np.int64)
    inside = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    g = obj.cost_matrix(m)
    f = obj.opening_costs(np.arange(n))
    if obj.mode is Mode.MAX:
        worst = np.where(inside[:, :, None], g[None, :, :], -np.inf).max(axis=1)
        per_center = np.maximum(f[None, :], worst)
    else:
        per_center = inside.astype(np.float64) @ g + f[None, :]
    per_center = np.where(inside, per_center, np.inf)
    return per_center.min(axis=1)


@lru_cache(maxsize=32)
def _restricted_growth_strings(n: int, k: int) -> np.ndarray:
    """All 0-based label strings of length n using exactly k labels in first-occurrence order."""
    rows = np.zeros((1, 1), dtype=np.int8)
    used = np.ones(1, dtype=np.int64)
    for i in range(1, n):
        left_after = n - i - 1
        grown, grown_used = [], []
        for label in range(k):
            new_used = np.maximum(used, label + 1)
            ok = (label <= used) & (k - new_used <= left_after)
            if not ok.any():
                continue
            chosen = rows[ok]
            grown.append(np.hstack([chosen, np.full((len(chosen), 1), label, dtype=np.int8)]))
            grown_used.append(new_used[ok])
        rows = np.vstack(grown)
        used = np.concatenate(grown_used)
    rows = rows[used == k]
    rows = rows[np.lexsort(rows.T[::-1])]
    rows.setflags(write=False)
    return rows


def count_partitions(n: int, k: int) -> int:
    """Number of partitions of n points into exactly k non-empty blocks."""
    _check_k(n, k)
    return len(_restricted_growth_strings(n, k))


def _block_masks(labels: np.ndarray, k: int) -> np.ndarray:
    weights = np.int64(1) << np.arange(labels.shape[1], dtype=np.int64)
    return np.stack([((labels == b) * weights).sum(axis=1) for b in range(k)], axis=1)


def _score_chunks(chunks: Iterable[np.ndarray], score) -> np.ndarray:
    threads = get_settings().threads
    chunks = list(chunks)
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(score, chunks))
    else:
        parts = [score(chunk) for chunk in chunks]
    return np.concatenate(parts) if parts else np.empty(0)


def _result(method: str, n: int, k: int, costs: np.ndarray,
            partition_of: Callable[[int], Tuple[int, ...]],
            tie_tol: Optional[float], evaluated: int) -> OracleResult:
    """partition_of(i) is the canonical assignment scored by costs[i]; duplicates are merged."""
    rel = get_settings().tie_tol if tie_tol is None else tie_tol
    best = float(costs.min())
    hits = np.flatnonzero(costs <= best + tie_tolerance(best, rel))
    optimal = sorted({partition_of(int(i)) for i in hits})
    logger.debug("%s: n=%d k=%d best=%.12g, %d optimal of %d", method, n, k, best, len(optimal), evaluated)
    return OracleResult(
        method=method,
        n=n,
        k=k,
        optimal_cost=best,
        optimal_partitions=[list(p) for p in optimal[:MAX_LISTED]],
        num_optimal=len(optimal),
        unique=len(optimal) == 1,
        evaluated=evaluated,
    )


def brute_force_optimal(m: MetricSpace, obj: Objective, k: int,
                        tie_tol: Optional[float] = None) -> OracleResult:
    n = m.n
    _check_cap(n, get_settings().oracle_cap, "brute_force_optimal")
    _check_k(n, k)
    logger.info("brute force: n=%d k=%d objective=%s", n, k, obj.name)

    scores = subset_scores(m, obj)
    labels = _restricted_growth_strings(n, k)

    def score(chunk: np.ndarray) -> np.ndarray:
        block = scores[_block_masks(chunk, k)]
        return block.max(axis=1) if obj.mode is Mode.MAX else block.sum(axis=1)

    costs = _score_chunks((labels[s:s + SCORE_CHUNK] for s in range(0, len(labels), SCORE_CHUNK)), score)
    return _result("brute_force", n, k, costs, lambda i: tuple(int(x) + 1 for x in labels[i]),
                   tie_tol, evaluated=len(labels))


def tree_partition_optimal(bt: RootedBinaryTree, m: MetricSpace, obj: Objective, k: int,
                           tie_tol: Optional[float] = None) -> OracleResult:
    """Best way to delete k-1 edges of the (original) spanning tree."""
    n = m.n
    if bt.n_points != n:
        raise InvalidParameterError(f"Tree has {bt.n_points} points, metric has {n}")
    _check_cap(n, get_settings().oracle_cap, "tree_partition_optimal")
    _check_k(n, k)

    scores = subset_scores(m, obj)
    edges = bt.contract_edges()
    costs, partitions = [], []
    for removed in itertools.combinations(range(len(edges)), k - 1):
        cut = set(removed)
        forest = UnionFind(n)
        for e, (i, j) in enumerate(edges):
            if e not in cut:
                forest.union(i, j)
        assignment = canonical_assignment([forest.find(p) for p in range(n)])
        block = scores[_block_masks(np.asarray([assignment]) - 1, k)[0]]
        costs.append(float(block.max() if obj.mode is Mode.MAX else block.sum()))
        partitions.append(assignment)
    return _result("tree_partition", n, k, np.asarray(costs), partitions.__getitem__, tie_tol,
                   evaluated=len(costs))


def center_enumeration_optimal(m: MetricSpace, obj: Objective, k: int,
                               tie_tol: Optional[float] = None) -> OracleResult:
    """
    Fix k centers, send every other point to its cheapest center (ties to the smallest
    center index). Sum mode only; relies on g(u, .) being nondecreasing.
    """
    if obj.mode is not Mode.SUM:
        raise ObjectiveError(f"center enumeration supports Sum mode only, got {obj.mode.value}")
    n = m.n
    _check_cap(n, get_settings().center_cap, "center_enumeration_optimal")
    _check_k(n, k)
    logger.info("center enumeration: n=%d k=%d objective=%s", n, k, obj.name)

    g = obj.cost_matrix(m)
    f = obj.opening_costs(np.arange(n))
    combos = np.array(list(itertools.combinations(range(n), k)), dtype=np.int64)

    def score(chunk: np.ndarray) -> np.ndarray:
        return g[:, chunk].min(axis=2).sum(axis=0) + f[chunk].sum(axis=1)

    step = max(1, SCORE_CHUNK // n)
    costs = _score_chunks((combos[s:s + step] for s in range(0, len(combos), step)), score)

    def partition_of(i: int) -> Tuple[int, ...]:
        centers = combos[i]
        nearest = g[:, centers].argmin(axis=1)
        nearest[centers] = np.arange(k)
        return canonical_assignment(nearest.tolist())

    return _result("center_enumeration", n, k, costs, partition_of, tie_tol, evaluated=len(combos))
