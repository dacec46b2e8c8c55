#!/usr/bin/env python3
"""
objectives.py

Natural center-based clustering objectives.

An objective is a pair (f, g) plus an aggregation mode:
  Sum: cost = sum_i [ f(c_i) + sum_{u in C_i} g(u, d(u, c_i)) ]
  Max: cost = max_i max( f(c_i), max_{u in C_i} g(u, d(u, c_i)) )
with each center c_i chosen inside its cluster to minimize the cluster's score.

Plug-in contract: user-supplied f and g must be pure, total, finite and safe to call
from several threads at once; g(u, .) must be nondecreasing.
"""

import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from src.config import tie_tolerance
from src.errors import ClusteringError, InvalidParameterError, ObjectiveError
from src.metric.metric_core import MetricSpace

logger = logging.getLogger(__name__)

BUILTIN_NAMES = ("kmedian", "kmeans", "kcenter", "facility_location")

# Grid used to spot-check monotonicity of user-supplied g
MONOTONICITY_SAMPLE_POINTS = 8
MONOTONICITY_SAMPLE_RADII = np.linspace(0.0, 100.0, 41)


class MonotonicityWarning(UserWarning):
    """g(u, r) was observed to decrease in r on the sample grid."""


class Mode(str, Enum):
    SUM = "sum"
    MAX = "max"


@dataclass(frozen=True)
class Objective:
    """
    open_cost(c) -> f_c and assign_cost(u, r) -> g_u(r).

    With vectorized=True both callables must accept numpy arrays and broadcast
    (the builtins do); otherwise they are called once per scalar argument.
    """
    name: str
    mode: Mode
    open_cost: Callable
    assign_cost: Callable
    vectorized: bool = False

    def opening_costs(self, points: Sequence[int]) -> np.ndarray:
        idx = np.asarray(points, dtype=np.int64)
        if self.vectorized:
            values = np.broadcast_to(np.asarray(self.open_cost(idx), dtype=np.float64), idx.shape)
        else:
            values = np.array([float(self.open_cost(int(c))) for c in idx], dtype=np.float64)
        self._check_values(values, "open_cost")
        return np.array(values, dtype=np.float64)

    def assignment_costs(self, points: Sequence[int], radii: np.ndarray) -> np.ndarray:
        """g(points[a], radii[a, b]) for a 2-D radius block whose rows follow `points`."""
        idx = np.asarray(points, dtype=np.int64)
        r = np.asarray(radii, dtype=np.float64)
        if self.vectorized:
            values = np.broadcast_to(
                np.asarray(self.assign_cost(idx[:, None], r), dtype=np.float64), r.shape
            )
        else:
            values = np.array(
                [[float(self.assign_cost(int(u), float(x))) for x in row] for u, row in zip(idx, r)],
                dtype=np.float64,
            ).reshape(r.shape)
        self._check_values(values, "assign_cost")
        return np.array(values, dtype=np.float64)

    def cost_matrix(self, m: MetricSpace) -> np.ndarray:
        """G[u, c] = g(u, d(u, c)) for every pair of points."""
        return self.assignment_costs(np.arange(m.n), m.dist)

    def _check_values(self, values: np.ndarray, what: str):
        if not np.all(np.isfinite(values)):
            raise ObjectiveError(f"{self.name}: {what} returned non-finite values")
        if self.mode is Mode.MAX and np.any(values < 0):
            raise ObjectiveError(f"{self.name}: {what} must be >= 0 in Max mode")

    def combine(self, a, b):
        """The aggregation operator: + in Sum mode, max in Max mode."""
        return np.maximum(a, b) if self.mode is Mode.MAX else a + b

    def spot_check_monotonicity(self, points: Sequence[int],
                                radii: np.ndarray = MONOTONICITY_SAMPLE_RADII) -> bool:
        """Sample g(u, r) on a grid and warn when it decreases in r."""
        idx = np.asarray(points, dtype=np.int64)
        grid = np.broadcast_to(np.sort(np.asarray(radii, dtype=np.float64)), (len(idx), len(radii)))
        values = self.assignment_costs(idx, grid)
        drops = np.argwhere(np.diff(values, axis=1) < 0)
        if len(drops):
            row, col = drops[0]
            warnings.warn(
                f"{self.name}: g(u={idx[row]}, r) decreases between r={grid[row, col]} and "
                f"r={grid[row, col + 1]}; results on this objective carry no exactness guarantee",
                MonotonicityWarning,
                stacklevel=2,
            )
            return False
        return True


@dataclass(frozen=True)
class Clustering:
    """
    Partition into k non-empty clusters with one center each.

    assignment holds 1-based cluster ids per point; centers are 0-based point indices with
    centers[i - 1] inside cluster i; cost is clustering_cost of the assignment.
    """
    assignment: Tuple[int, ...]
    centers: Tuple[int, ...]
    cost: float

    def __post_init__(self):
        assignment = tuple(int(a) for a in self.assignment)
        centers = tuple(int(c) for c in self.centers)
        k = len(centers)
        if k < 1:
            raise ClusteringError("A clustering needs at least one cluster")
        present = set(assignment)
        if present != set(range(1, k + 1)):
            raise ClusteringError(f"Cluster ids must cover 1..{k} exactly, got {sorted(present)}")
        for i, c in enumerate(centers, start=1):
            if not 0 <= c < len(assignment) or assignment[c] != i:
                raise ClusteringError(f"Center {c} of cluster {i} is not a member of that cluster")
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "cost", float(self.cost))

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def members(self, cluster_id: int) -> Tuple[int, ...]:
        return tuple(p for p, a in enumerate(self.assignment) if a == cluster_id)

    def blocks(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(self.members(i) for i in range(1, self.k + 1))


def builtin(name: str, opening_costs: Optional[Sequence[float]] = None,
            n: Optional[int] = None) -> Objective:
    """kmedian, kmeans, kcenter (Max mode) or facility_location(opening_costs)."""
    key = name.lower().replace("-", "").replace("_", "")
    if key == "kmedian":
        return Objective("kmedian", Mode.SUM, _zero_open, _linear, vectorized=True)
    if key == "kmeans":
        return Objective("kmeans", Mode.SUM, _zero_open, _squared, vectorized=True)
    if key == "kcenter":
        return Objective("kcenter", Mode.MAX, _zero_open, _linear, vectorized=True)
    if key == "facilitylocation":
        if opening_costs is None:
            raise ObjectiveError("facility_location needs one opening cost per point")
        costs = np.array(opening_costs, dtype=np.float64)
        if costs.ndim != 1:
            raise ObjectiveError("Opening costs must be a flat vector")
        if n is not None and len(costs) != n:
            raise ObjectiveError(f"Got {len(costs)} opening costs for {n} points")
        if not np.all(np.isfinite(costs)) or np.any(costs < 0):
            raise ObjectiveError("Opening costs must be finite and nonnegative")
        costs.setflags(write=False)
        return Objective("facility_location", Mode.SUM, lambda c: costs[c], _linear, vectorized=True)
    raise ObjectiveError(f"Unknown objective '{name}'; expected one of {', '.join(BUILTIN_NAMES)}")


def _zero_open(c):
    return np.zeros(np.shape(c))


def _linear(u, r):
    return r


def _squared(u, r):
    return np.square(r)


def custom(open_cost: Callable, assign_cost: Callable, mode: Mode = Mode.SUM,
           name: str = "custom", vectorized: bool = False, n: Optional[int] = None,
           sample_points: int = MONOTONICITY_SAMPLE_POINTS) -> Objective:
    """
    Wrap user callables. g is spot-checked on points 0..min(n, sample_points)-1; pass n when
    the callables index per-point data so the check stays inside it.
    """
    if n is not None and n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    obj = Objective(name, Mode(mode), open_cost, assign_cost, vectorized=vectorized)
    obj.spot_check_monotonicity(range(sample_points if n is None else min(n, sample_points)))
    return obj


def power_objective(obj: Objective, p: float) -> Objective:
    """
    l_p-aggregate objectives reduce to Sum mode with f' = f^p and g' = g^p; minimizing the
    result minimizes the l_p aggregate.
    """
    if obj.mode is not Mode.SUM:
        raise ObjectiveError("The l_p reduction applies to Sum-mode objectives")
    if not p >= 1:
        raise InvalidParameterError(f"p must be >= 1, got {p}")

    if obj.vectorized:
        def f(c):
            return np.power(obj.open_cost(c), p)

        def g(u, r):
            return np.power(obj.assign_cost(u, r), p)
    else:
        def f(c):
            return float(obj.open_cost(c)) ** p

        def g(u, r):
            return float(obj.assign_cost(u, r)) ** p

    return Objective(f"{obj.name}^{p:g}", Mode.SUM, f, g, vectorized=obj.vectorized)


def _member_scores(members: np.ndarray, m: MetricSpace, obj: Objective) -> np.ndarray:
    """Score of the cluster for each candidate center (column order follows members)."""
    block = m.dist[np.ix_(members, members)]
    g = obj.assignment_costs(members, block)
    f = obj.opening_costs(members)
    if obj.mode is Mode.MAX:
        return np.maximum(f, g.max(axis=0))
    return f + g.sum(axis=0)


def cluster_cost(members: Sequence[int], m: MetricSpace, obj: Objective) -> Tuple[float, Tuple[int, ...]]:
    """Minimum score of one cluster and every center attaining it (within tie tolerance)."""
    idx = np.unique(np.asarray(list(members), dtype=np.int64))
    if len(idx) == 0:
        raise ClusteringError("Cannot score an empty cluster")
    scores = _member_scores(idx, m, obj)
    best = float(scores.min())
    optimal = idx[scores <= best + tie_tolerance(best)]
    return best, tuple(int(c) for c in optimal)


def _validate_assignment(assignment: Sequence[int], n: int) -> Tuple[int, ...]:
    labels = tuple(int(a) for a in assignment)
    if len(labels) != n:
        raise ClusteringError(f"Assignment has {len(labels)} entries for {n} points")
    k = max(labels) if labels else 0
    present = set(labels)
    if min(labels) < 1 or present != set(range(1, k + 1)):
        missing = sorted(set(range(1, k + 1)) - present)
        raise ClusteringError(f"Cluster ids must be 1..{k} with none empty; empty ids: {missing}")
    return labels


def clustering_cost(assignment: Sequence[int], m: MetricSpace, obj: Objective) -> Tuple[float, Tuple[int, ...]]:
    """Aggregate cluster costs; centers are the smallest-index optimal center per cluster."""
    labels = np.asarray(_validate_assignment(assignment, m.n))
    k = int(labels.max())
    costs = []
    centers = []
    for cluster_id in range(1, k + 1):
        cost, optimal = cluster_cost(np.flatnonzero(labels == cluster_id), m, obj)
        costs.append(cost)
        centers.append(optimal[0])
    total = max(costs) if obj.mode is Mode.MAX else sum(costs)
    return float(total), tuple(centers)


def fixed_center_cost(assignment: Sequence[int], centers: Sequence[int], m: MetricSpace,
                      obj: Objective) -> float:
    """Objective value when cluster i is served by centers[i - 1], no re-optimization."""
    labels = np.asarray(_validate_assignment(assignment, m.n))
    center_of = np.asarray(centers, dtype=np.int64)[labels - 1]
    points = np.arange(m.n)
    g = obj.assignment_costs(points, m.dist[points, center_of][:, None])[:, 0]
    f = obj.opening_costs(np.asarray(centers, dtype=np.int64))
    if obj.mode is Mode.MAX:
        return float(max(f.max(), g.max()))
    return float(f.sum() + g.sum())


def canonical_assignment(labels: Sequence) -> Tuple[int, ...]:
    """Relabel so ids are 1..k in order of first occurrence (blocks sorted by smallest member)."""
    mapping = {}
    out = []
    for label in labels:
        if label not in mapping:
            mapping[label] = len(mapping) + 1
        out.append(mapping[label])
    return tuple(out)


def clustering_from_assignment(assignment: Sequence, m: MetricSpace, obj: Objective) -> Clustering:
    canonical = canonical_assignment(assignment)
    cost, centers = clustering_cost(canonical, m, obj)
    return Clustering(canonical, centers, cost)


def lloyd_step(c: Clustering, m: MetricSpace, obj: Objective) -> Tuple[Clustering, float]:
    """
    Keep the centers and move every non-center point to a strictly nearer center, if any;
    among equally near better centers the smallest cluster id wins. Ties with the current
    center keep the point where it is.

    Returns:
        (moved clustering with the same centers and cost = clustering_cost of the new
        assignment, objective value when the kept centers serve the new assignment)
    """
    if c.n != m.n:
        raise ClusteringError(f"Clustering covers {c.n} points, metric has {m.n}")
    centers = np.asarray(c.centers, dtype=np.int64)
    current = np.asarray(c.assignment, dtype=np.int64)
    to_centers = m.dist[:, centers]
    own = to_centers[np.arange(m.n), current - 1]
    nearest = to_centers.argmin(axis=1)
    closer = to_centers[np.arange(m.n), nearest] < own

    moved = np.where(closer, nearest + 1, current)
    moved[centers] = np.arange(1, len(centers) + 1)
    n_moved = int(np.count_nonzero(moved != current))
    if n_moved:
        logger.debug("lloyd improvement moved %d points", n_moved)
    assignment = tuple(int(a) for a in moved)
    fixed = fixed_center_cost(assignment, centers, m, obj)
    cost, _ = clustering_cost(assignment, m, obj)
    return Clustering(assignment, c.centers, cost), fixed


def lloyd_improvement(c: Clustering, m: MetricSpace, obj: Objective) -> Clustering:
    """One Lloyd reassignment; see lloyd_step for the fixed-center cost."""
    return lloyd_step(c, m, obj)[0]
