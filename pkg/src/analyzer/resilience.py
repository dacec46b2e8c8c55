#!/usr/bin/env python3
"""
resilience.py

Perturbation resilience: adversarial witnesses, seeded probing against the oracle,
planted resilient instances and the single-linkage baseline.

An instance is (alpha, 1)-metric resilient when its optimal clustering is unique and stays
the unique optimum under every metric d' with d/alpha <= d' <= d. Probing can only sample
such metrics, so a "certified" instance is an empirical label: unique oracle optimum,
stable under every sampled perturbation, and alpha-center proximity at the optimum.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from tqdm import tqdm

from src.config import get_settings
from src.errors import InvalidParameterError
from src.metric.metric_core import (
    MetricSpace,
    adversarial_perturbation,
    check_seed,
    from_points,
    is_metric_perturbation,
    random_metric_perturbation,
    submetric,
)
from src.objective.objectives import Clustering, Objective, canonical_assignment, clustering_cost
from src.analyzer.proximity import ProximityViolation, check_center_proximity
from src.solver.mst import single_linkage_components
from src.solver.oracle import OracleResult, brute_force_optimal

logger = logging.getLogger(__name__)

DEFAULT_SHRINK_FRACTION = 0.5
MIN_MARGIN = 2.0


@dataclass(frozen=True)
class Witness:
    """Adversarial perturbation built from one proximity violation of the base optimum."""
    base_partition: Tuple[int, ...]
    p: int
    i: int
    j: int
    c_i: int
    c_j: int
    r_star: float
    alpha: float
    perturbed: MetricSpace
    bounds_ok: bool
    intra_cluster_preserved: bool
    perturbed_optimum: OracleResult
    changes_optimum: bool
    is_proof: bool

    def summary(self) -> dict:
        return {
            "p": self.p,
            "i": self.i,
            "j": self.j,
            "c_i": self.c_i,
            "c_j": self.c_j,
            "r_star": self.r_star,
            "alpha": self.alpha,
            "bounds_ok": self.bounds_ok,
            "intra_cluster_preserved": self.intra_cluster_preserved,
            "changes_optimum": self.changes_optimum,
            "is_proof": self.is_proof,
            "base_partition": list(self.base_partition),
            "perturbed_optimum": self.perturbed_optimum.model_dump(),
        }


class ProbeFailure(BaseModel):
    trial: int
    seed: int
    partitions: List[List[int]]  # optimal partitions of the perturbed instance


class ResilienceProbeReport(BaseModel):
    alpha: float
    seed: int
    shrink_fraction: float
    trials: int
    trials_run: int
    unique: bool
    stable: bool
    holds: bool                              # alpha-center proximity at the base optimum
    violations: List[ProximityViolation]
    certified: bool
    base_cost: float
    base_partition: List[int]
    first_failure: Optional[ProbeFailure] = None


def _check_alpha(alpha: float):
    if not alpha >= 1:
        raise InvalidParameterError(f"alpha must be >= 1, got {alpha}")


def _clustering_of(partition, m: MetricSpace, obj: Objective) -> Clustering:
    cost, centers = clustering_cost(partition, m, obj)
    return Clustering(tuple(partition), centers, cost)


def _block_preserved(base: MetricSpace, perturbed: MetricSpace, members, tol: float = 1e-12) -> bool:
    before = submetric(base, members).dist
    after = submetric(perturbed, members).dist
    return bool(np.all(np.abs(before - after) <= tol * np.maximum(before, 1.0)))


def adversarial_witness(m: MetricSpace, obj: Objective, k: int, alpha: float) -> Optional[Witness]:
    """
    Shrink d(p, c_j) to r* = d(p, c_i) for the first proximity violation of the base
    optimum and re-solve. Returns None when proximity holds or no violation admits the
    construction (r* must be positive and at most d(p, c_j)).
    """
    _check_alpha(alpha)
    base = brute_force_optimal(m, obj, k)
    partition = tuple(base.optimal_partitions[0])
    clustering = _clustering_of(partition, m, obj)
    report = check_center_proximity(clustering, m, alpha)
    if report.holds:
        return None

    for v in report.violations:
        r_star = v.dpi
        if not 0 < r_star <= v.dpj:
            continue
        c_i, c_j = clustering.centers[v.i - 1], clustering.centers[v.j - 1]
        perturbed = adversarial_perturbation(m, v.p, c_j, r_star)
        bounds_ok = is_metric_perturbation(m, perturbed, alpha, 1.0)
        preserved = (_block_preserved(m, perturbed, clustering.members(v.i))
                     and _block_preserved(m, perturbed, clustering.members(v.j)))
        result = brute_force_optimal(perturbed, obj, k)
        changed = result.optimal_partitions != base.optimal_partitions
        logger.info("witness at p=%d (%d -> %d): r*=%.6g, optimum %s",
                    v.p, v.i, v.j, r_star, "changed" if changed else "unchanged")
        return Witness(
            base_partition=partition,
            p=v.p,
            i=v.i,
            j=v.j,
            c_i=c_i,
            c_j=c_j,
            r_star=r_star,
            alpha=float(alpha),
            perturbed=perturbed,
            bounds_ok=bounds_ok,
            intra_cluster_preserved=preserved,
            perturbed_optimum=result,
            changes_optimum=changed,
            is_proof=bounds_ok and changed,
        )
    return None


def probe_resilience(m: MetricSpace, obj: Objective, k: int, alpha: float, trials: int, seed: int,
                     shrink_fraction: float = DEFAULT_SHRINK_FRACTION,
                     show_progress: bool = False) -> ResilienceProbeReport:
    """
    Referee `trials` seeded (alpha, 1)-perturbations with the oracle.

    Trial t uses seed + t. A trial fails unless the perturbed instance has exactly the
    base partition as its unique optimum; the report keeps the lowest failing trial.
    """
    _check_alpha(alpha)
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if not 0.0 <= shrink_fraction <= 1.0:
        raise InvalidParameterError(f"shrink_fraction must be in [0, 1], got {shrink_fraction}")
    seed = check_seed(seed)

    base = brute_force_optimal(m, obj, k)
    partition = base.optimal_partitions[0]
    proximity = check_center_proximity(_clustering_of(partition, m, obj), m, alpha)
    report = dict(alpha=float(alpha), seed=seed, shrink_fraction=shrink_fraction, trials=trials,
                  base_cost=base.optimal_cost, base_partition=partition,
                  holds=proximity.holds, violations=proximity.violations)
    if not base.unique:
        logger.info("probe: base optimum is not unique (%d optima), skipping trials", base.num_optimal)
        return ResilienceProbeReport(**report, trials_run=0, unique=False, stable=True, certified=False)

    def referee(t: int) -> OracleResult:
        perturbed = random_metric_perturbation(m, alpha, seed + t, shrink_fraction)
        return brute_force_optimal(perturbed, obj, k)

    threads = get_settings().threads
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    outcomes = pool.map(referee, range(1, trials + 1)) if pool else map(referee, range(1, trials + 1))

    first_failure = None
    run = 0
    try:
        for t, result in tqdm(zip(range(1, trials + 1), outcomes), total=trials,
                              desc="probe", disable=not show_progress):
            run = t
            if not (result.unique and result.optimal_partitions[0] == partition):
                first_failure = ProbeFailure(trial=t, seed=seed + t, partitions=result.optimal_partitions)
                logger.info("probe: trial %d (seed %d) changed the optimum", t, seed + t)
                break
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)

    stable = first_failure is None
    return ResilienceProbeReport(
        **report,
        trials_run=run,
        unique=True,
        stable=stable,
        certified=stable and proximity.holds,
        first_failure=first_failure,
    )


def generate_resilient_instance(n: int, k: int, margin: float, spread: float, seed: int,
                                dim: int = 1, shuffle: bool = True) -> Tuple[MetricSpace, Tuple[int, ...]]:
    """
    Plant k tight groups on axis 0, sites 2*spread*(1 + 2*margin) apart, each point within
    `spread` of its site. Group sizes differ by at most one (earlier groups larger).

    Returns:
        (MetricSpace, planted canonical assignment)
    """
    if not 1 <= k <= n:
        raise InvalidParameterError(f"Need n >= k >= 1, got n={n}, k={k}")
    if not margin > MIN_MARGIN:
        raise InvalidParameterError(f"margin must be > {MIN_MARGIN}, got {margin}")
    if not (spread > 0 and math.isfinite(spread)):
        raise InvalidParameterError(f"spread must be a positive finite number, got {spread}")
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    seed = check_seed(seed)

    rng = np.random.Generator(np.random.PCG64(seed))
    sizes = [n // k + (1 if b < n % k else 0) for b in range(k)]
    labels = np.repeat(np.arange(k), sizes)
    separation = 2.0 * spread * (1.0 + 2.0 * margin)
    sites = np.zeros((k, dim))
    sites[:, 0] = np.arange(k) * separation
    half_width = spread / math.sqrt(dim)
    points = sites[labels] + rng.uniform(-half_width, half_width, size=(n, dim))
    if shuffle:
        order = rng.permutation(n)
        points, labels = points[order], labels[order]

    logger.debug("planted %d points in %d groups (margin=%g, spread=%g, seed=%d)", n, k, margin, spread, seed)
    return from_points(points), canonical_assignment(labels.tolist())


def single_linkage_baseline(m: MetricSpace, k: int) -> Tuple[int, ...]:
    """Clusters = components of the Kruskal forest after n - k merges."""
    if not 1 <= k <= m.n:
        raise InvalidParameterError(f"k must be in [1, {m.n}], got {k}")
    return canonical_assignment(single_linkage_components(m, k))
