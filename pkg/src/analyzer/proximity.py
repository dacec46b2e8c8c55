#!/usr/bin/env python3
"""
proximity.py

Center proximity and closeness checks for a clustering with centers.

A clustering has alpha-center proximity when every point p in cluster i satisfies
d(p, c_j) > alpha * d(p, c_i) for every other center c_j. The checks here are exhaustive and
list every violating pair; boundary cases (equality) count as violations.
"""

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from src.errors import ClusteringError
from src.metric.metric_core import MetricSpace
from src.objective.objectives import Clustering, Objective, cluster_cost

logger = logging.getLogger(__name__)

# Slack added to alpha * d(p, c_i) when re-checking a listed violation
PROXIMITY_SLACK = 1e-12


class ProximityViolation(BaseModel):
    p: int
    i: int          # cluster of p (1-based)
    j: int          # competing cluster (1-based)
    dpi: float      # d(p, c_i)
    dpj: float      # d(p, c_j)

    def as_tuple(self):
        return (self.p, self.i, self.j, self.dpi, self.dpj)


class ProximityReport(BaseModel):
    alpha: float
    holds: bool
    violations: List[ProximityViolation]
    centers: List[int]
    optimal_centers: Optional[List[List[int]]] = None


class ClosenessViolation(BaseModel):
    u: int
    v: int
    d_u_center: float
    d_u_v: float


class ClosenessReport(BaseModel):
    holds: bool
    violations: List[ClosenessViolation]


def _check_sizes(c: Clustering, m: MetricSpace):
    if c.n != m.n:
        raise ClusteringError(f"Clustering covers {c.n} points, metric has {m.n}")


def check_center_proximity(c: Clustering, m: MetricSpace, alpha: float,
                           obj: Optional[Objective] = None) -> ProximityReport:
    """
    Check alpha-center proximity of `c` against its reported centers.

    Args:
        c (Clustering): Clustering whose centers are tested
        m (MetricSpace): Distances the clustering lives in
        alpha (float): Proximity factor
        obj (Objective, optional): When given, every optimal center of every cluster is
            listed alongside the report (only the reported centers are tested)

    Returns:
        ProximityReport: holds iff no (p, j) with d(p, c_j) <= alpha * d(p, c_i)
    """
    _check_sizes(c, m)
    centers = np.asarray(c.centers, dtype=np.int64)
    own_id = np.asarray(c.assignment, dtype=np.int64) - 1
    rows = np.arange(m.n)

    to_centers = m.dist[:, centers]
    own = to_centers[rows, own_id]
    bad = to_centers <= alpha * own[:, None]
    bad[rows, own_id] = False

    violations = [
        ProximityViolation(p=int(p), i=int(own_id[p]) + 1, j=int(j) + 1,
                           dpi=float(own[p]), dpj=float(to_centers[p, j]))
        for p, j in np.argwhere(bad)
    ]
    optimal = None
    if obj is not None:
        optimal = [list(cluster_cost(members, m, obj)[1]) for members in c.blocks()]
    logger.debug("center proximity alpha=%g: %d violations", alpha, len(violations))
    return ProximityReport(alpha=float(alpha), holds=not violations, violations=violations,
                           centers=list(c.centers), optimal_centers=optimal)


def check_closer_to_own_center(c: Clustering, m: MetricSpace) -> ClosenessReport:
    """
    Check that every point is strictly closer to its own center than to any point of
    another cluster.

    Args:
        c (Clustering): Clustering with centers
        m (MetricSpace): Distances

    Returns:
        ClosenessReport: violating (u, v) pairs with d(u, c_i) >= d(u, v), v outside C_i
    """
    _check_sizes(c, m)
    labels = np.asarray(c.assignment, dtype=np.int64)
    centers = np.asarray(c.centers, dtype=np.int64)
    own = m.dist[np.arange(m.n), centers[labels - 1]]
    bad = (labels[:, None] != labels[None, :]) & (m.dist <= own[:, None])
    violations = [
        ClosenessViolation(u=int(u), v=int(v), d_u_center=float(own[u]), d_u_v=float(m.dist[u, v]))
        for u, v in np.argwhere(bad)
    ]
    return ClosenessReport(holds=not violations, violations=violations)
