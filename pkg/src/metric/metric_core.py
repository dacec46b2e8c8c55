#!/usr/bin/env python3
"""
metric_core.py

Finite metric spaces: construction, validation, shortest-path closure and the two
contraction-only perturbations used to probe resilience.

All randomness goes through numpy's PCG64 bit generator (PCG-XSL-RR 128/64), which
produces identical streams on every platform for a given seed.

Usage:
  from src.metric.metric_core import from_points, adversarial_perturbation
  space = from_points([[0], [1], [10], [11]])
  shrunk = adversarial_perturbation(space, p=1, c_j=2, r_star=1.0)
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.config import DEFAULT_EPS
from src.errors import InvalidParameterError, MetricError

logger = logging.getLogger(__name__)

# Report at most this many violations of one kind; counts stay exact.
MAX_LISTED_VIOLATIONS = 1000


class Norm(str, Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"


@dataclass(frozen=True)
class MetricSpace:
    """
    n points with a dense symmetric distance matrix.

    The constructor checks the cheap axioms (square, finite, nonnegative, zero diagonal,
    exact symmetry). The triangle inequality is O(n^3) and only checked by `from_matrix`
    or `validate_metric`.
    """
    dist: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        dist = np.array(self.dist, dtype=np.float64, copy=True)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise MetricError(f"Distance matrix must be square, got shape {dist.shape}")
        if dist.shape[0] < 1:
            raise MetricError("Metric space needs at least one point")
        if not np.all(np.isfinite(dist)):
            raise MetricError("Distance matrix has non-finite entries")
        if np.any(dist < 0):
            i, j = np.argwhere(dist < 0)[0]
            raise MetricError(f"Negative distance d({i},{j}) = {dist[i, j]}")
        if np.any(np.diag(dist) != 0):
            i = int(np.flatnonzero(np.diag(dist))[0])
            raise MetricError(f"Nonzero diagonal entry d({i},{i}) = {dist[i, i]}")
        if not np.array_equal(dist, dist.T):
            i, j = np.argwhere(dist != dist.T)[0]
            raise MetricError(f"Asymmetric distances d({i},{j}) != d({j},{i})")
        if self.labels is not None:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != dist.shape[0]:
                raise MetricError(f"Got {len(labels)} labels for {dist.shape[0]} points")
            object.__setattr__(self, "labels", labels)
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    @classmethod
    def from_matrix(cls, dist, labels: Optional[Sequence[str]] = None,
                    eps: float = DEFAULT_EPS, check_triangle: bool = True) -> "MetricSpace":
        """Build from a user matrix, rejecting anything that is not a metric within eps."""
        matrix = np.asarray(dist, dtype=np.float64)
        report = validate_metric(matrix, eps=eps, check_triangle=check_triangle)
        if not report.ok:
            first = report.violations[0]
            raise MetricError(f"Not a metric: {first.kind} at {first.indices} ({report.total} violations)")
        return cls(matrix, labels=tuple(labels) if labels is not None else None)


@dataclass(frozen=True)
class MetricViolation:
    kind: str  # "asymmetry" | "nonzero_diagonal" | "negative" | "non_finite" | "triangle"
    indices: Tuple[int, ...]
    amount: float


@dataclass
class ValidationReport:
    ok: bool
    violations: List[MetricViolation] = field(default_factory=list)
    total: int = 0
    eps: float = DEFAULT_EPS


@dataclass(frozen=True)
class PerturbationSpec:
    """
    Parameters of one contraction-only perturbation.

    Adversarial mode shrinks the single edge (p, cj) to r_star; random mode shrinks a
    seeded fraction of all pairs by factors in [1/alpha, 1].
    """
    alpha: float
    mode: str  # "adversarial" | "random"
    p: Optional[int] = None
    cj: Optional[int] = None
    r_star: Optional[float] = None
    seed: Optional[int] = None
    shrink_fraction: Optional[float] = None

    def __post_init__(self):
        if not self.alpha >= 1:
            raise InvalidParameterError(f"alpha must be >= 1, got {self.alpha}")
        if self.mode == "adversarial":
            if self.p is None or self.cj is None or self.r_star is None:
                raise InvalidParameterError("adversarial perturbation needs p, cj and r_star")
            if not self.r_star > 0:
                raise InvalidParameterError(f"r_star must be > 0, got {self.r_star}")
        elif self.mode == "random":
            if self.seed is None or self.shrink_fraction is None:
                raise InvalidParameterError("random perturbation needs seed and shrink_fraction")
        else:
            raise InvalidParameterError(f"Unknown perturbation mode: {self.mode}")

    def apply(self, m: MetricSpace) -> MetricSpace:
        if self.mode == "adversarial":
            return adversarial_perturbation(m, self.p, self.cj, self.r_star)
        return random_metric_perturbation(m, self.alpha, self.seed, self.shrink_fraction)


def from_points(coords, norm: Norm = Norm.EUCLIDEAN, labels: Optional[Sequence[str]] = None) -> MetricSpace:
    """Distance matrix of real vectors under the Euclidean or Manhattan norm."""
    try:
        points = np.array(coords, dtype=np.float64)
    except ValueError as e:
        raise MetricError(f"Point coordinates have mismatched dimensions: {e}")
    if points.size == 0 or points.shape[0] == 0:
        raise MetricError("No points given")
    if points.ndim != 2 or points.shape[1] < 1:
        raise MetricError(f"Points must form an (n, d>=1) array, got shape {points.shape}")

    diff = points[:, None, :] - points[None, :, :]
    if Norm(norm) is Norm.MANHATTAN:
        dist = np.abs(diff).sum(axis=2)
    else:
        dist = np.sqrt((diff ** 2).sum(axis=2))
    # exact symmetry and zero diagonal regardless of rounding order
    dist = np.triu(dist, k=1)
    dist = dist + dist.T
    return MetricSpace(dist, labels=tuple(labels) if labels is not None else None)


def validate_metric(dist, eps: float = DEFAULT_EPS, check_triangle: bool = True) -> ValidationReport:
    """List every axiom violation with witnessing indices; ok iff none."""
    matrix = np.asarray(dist, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise MetricError(f"Distance matrix must be square, got shape {matrix.shape}")
    n = matrix.shape[0]
    violations: List[MetricViolation] = []
    total = 0

    def collect(kind, index_rows, amounts):
        nonlocal total
        total += len(index_rows)
        room = MAX_LISTED_VIOLATIONS - sum(1 for v in violations if v.kind == kind)
        for idx, amount in list(zip(index_rows, amounts))[:max(room, 0)]:
            violations.append(MetricViolation(kind, tuple(int(i) for i in idx), float(amount)))

    finite = np.isfinite(matrix)
    bad = np.argwhere(~finite)
    collect("non_finite", bad, [np.nan] * len(bad))

    safe = np.where(finite, matrix, 0.0)
    diag = np.flatnonzero(np.diag(safe) != 0)
    collect("nonzero_diagonal", [(i,) for i in diag], np.diag(safe)[diag])

    neg = np.argwhere(safe < 0)
    collect("negative", neg, safe[safe < 0])

    upper = np.triu(safe != safe.T, k=1)
    asym = np.argwhere(upper)
    collect("asymmetry", asym, [abs(safe[i, j] - safe[j, i]) for i, j in asym])

    if check_triangle and n >= 3:
        # d(i,j) <= d(i,m) + d(m,j) + eps, one intermediate point at a time
        for m in range(n):
            via = safe[:, m:m + 1] + safe[m:m + 1, :]
            excess = safe - via - eps
            hits = np.argwhere(np.triu(excess > 0, k=1))
            if len(hits):
                collect("triangle", [(i, j, m) for i, j in hits], [excess[i, j] for i, j in hits])

    report = ValidationReport(ok=total == 0, violations=violations, total=total, eps=eps)
    logger.debug("validated %dx%d matrix: %d violations", n, n, total)
    return report


def _floyd_warshall(lengths: np.ndarray) -> np.ndarray:
    dist = np.array(lengths, dtype=np.float64, copy=True)
    n = dist.shape[0]
    for m in range(n):
        np.minimum(dist, dist[:, m:m + 1] + dist[m:m + 1, :], out=dist)
    np.fill_diagonal(dist, 0.0)
    return dist


def metric_closure(weights) -> MetricSpace:
    """Shortest-path metric of the complete graph whose edge lengths are `weights`."""
    lengths = np.asarray(weights, dtype=np.float64)
    if lengths.ndim != 2 or lengths.shape[0] != lengths.shape[1]:
        raise MetricError(f"Weight matrix must be square, got shape {lengths.shape}")
    if not np.all(np.isfinite(lengths)):
        raise MetricError("Weight matrix has non-finite entries")
    if np.any(lengths < 0):
        raise MetricError("Weight matrix has negative entries")
    if not np.array_equal(lengths, lengths.T):
        raise MetricError("Weight matrix is not symmetric")
    return MetricSpace(_floyd_warshall(lengths))


def adversarial_perturbation(m: MetricSpace, p: int, c_j: int, r_star: float) -> MetricSpace:
    """
    Shrink the edge (p, c_j) to r_star and return the induced shortest-path metric:

        d'(u,v) = min(d(u,v), d(u,p) + r* + d(c_j,v), d(v,p) + r* + d(c_j,u))
    """
    n = m.n
    if not (0 <= p < n and 0 <= c_j < n):
        raise InvalidParameterError(f"Point indices ({p}, {c_j}) out of range for n={n}")
    if p == c_j:
        raise InvalidParameterError("p and c_j must be distinct points")
    if not r_star > 0:
        raise InvalidParameterError(f"r_star must be > 0, got {r_star}")
    if r_star > m.dist[p, c_j]:
        raise InvalidParameterError(
            f"r_star={r_star} exceeds d(p,c_j)={m.dist[p, c_j]}; the construction only shrinks"
        )
    d = m.dist
    through = d[:, p:p + 1] + r_star + d[c_j:c_j + 1, :]
    shrunk = np.minimum(d, np.minimum(through, through.T))
    return MetricSpace(shrunk, labels=m.labels)


def check_seed(seed) -> int:
    """PCG64 accepts non-negative integers only."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise InvalidParameterError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def random_metric_perturbation(m: MetricSpace, alpha: float, seed: int,
                               shrink_fraction: float) -> MetricSpace:
    """
    Seeded (alpha, 1)-metric perturbation: shrink a random shrink_fraction of the pairs by
    independent factors drawn uniformly from [1/alpha, 1], then take the metric closure.
    """
    if not alpha >= 1:
        raise InvalidParameterError(f"alpha must be >= 1, got {alpha}")
    if not 0.0 <= shrink_fraction <= 1.0:
        raise InvalidParameterError(f"shrink_fraction must be in [0, 1], got {shrink_fraction}")
    seed = check_seed(seed)
    n = m.n
    rows, cols = np.triu_indices(n, k=1)
    count = int(round(shrink_fraction * len(rows)))
    if count == 0 or alpha == 1:
        return m

    rng = np.random.Generator(np.random.PCG64(seed))
    chosen = np.sort(rng.choice(len(rows), size=count, replace=False))
    factors = rng.uniform(1.0 / alpha, 1.0, size=count)

    lengths = np.array(m.dist, copy=True)
    lengths[rows[chosen], cols[chosen]] *= factors
    lengths[cols[chosen], rows[chosen]] = lengths[rows[chosen], cols[chosen]]
    return MetricSpace(_floyd_warshall(lengths), labels=m.labels)


def scale_metric(m: MetricSpace, lam: float) -> MetricSpace:
    if not lam > 0:
        raise InvalidParameterError(f"Scale factor must be > 0, got {lam}")
    return MetricSpace(m.dist * lam, labels=m.labels)


def reduce_to_contraction(m: MetricSpace, alpha1: float, alpha2: float) -> Tuple[MetricSpace, float]:
    """
    An (alpha1, alpha2)-resilient instance scaled by alpha2 is (alpha1*alpha2, 1)-resilient
    with the same optimal clustering.
    """
    if not (alpha1 >= 1 and alpha2 >= 1):
        raise InvalidParameterError(f"alpha1, alpha2 must be >= 1, got ({alpha1}, {alpha2})")
    return scale_metric(m, alpha2), alpha1 * alpha2


def is_metric_perturbation(base: MetricSpace, perturbed: MetricSpace, alpha1: float,
                           alpha2: float = 1.0, tol: float = 1e-12) -> bool:
    """base/alpha1 <= perturbed <= alpha2 * base entrywise, and perturbed is a metric."""
    if base.n != perturbed.n:
        return False
    d, dp = base.dist, perturbed.dist
    slack = tol * np.maximum(d, 1.0)
    lower_ok = np.all(d / alpha1 <= dp + slack)
    upper_ok = np.all(dp <= alpha2 * d + slack)
    return bool(lower_ok and upper_ok and validate_metric(dp, eps=tol * max(1.0, float(d.max()))).ok)


def submetric(m: MetricSpace, members: Sequence[int]) -> MetricSpace:
    idx = np.asarray(members, dtype=np.int64)
    labels = tuple(m.labels[i] for i in idx) if m.labels is not None else None
    return MetricSpace(m.dist[np.ix_(idx, idx)], labels=labels)
