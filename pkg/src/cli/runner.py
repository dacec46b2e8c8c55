#!/usr/bin/env python3
"""
runner.py

Batch commands behind the launcher. `run(config)` resolves inputs, calls the library and
writes one JSON document (see src/report/json_report.py); it returns the process exit code:
0 success, 2 metric validation failed, 1 any usage or runtime error.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from src.analyzer.resilience import (
    DEFAULT_SHRINK_FRACTION,
    generate_resilient_instance,
    probe_resilience,
    single_linkage_baseline,
)
from src.config import DEFAULT_ALPHA, DEFAULT_EPS
from src.errors import ClusteringError, InvalidParameterError
from src.ingest.csv_io import (
    read_matrix_csv,
    read_opening_costs,
    read_points_csv,
    write_edges_csv,
    write_matrix_csv,
)
from src.metric.metric_core import MetricSpace, Norm, from_points, validate_metric
from src.objective.objectives import Objective, builtin
from src.report.json_report import write_report
from src.solver.mst import kruskal
from src.solver.oracle import brute_force_optimal
from src.solver.tree_dp import dp_cluster, root_and_binarize

logger = logging.getLogger(__name__)

COMMANDS = ("cluster", "oracle", "probe", "generate", "validate", "baseline")
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2

# Fields each command cannot run without
REQUIRED = {
    "cluster": ("input", "k"),
    "oracle": ("input", "k"),
    "probe": ("input", "k"),
    "baseline": ("input", "k"),
    "validate": ("input",),
    "generate": ("n", "k"),
}


class RunConfig(BaseModel):
    command: Literal["cluster", "oracle", "probe", "generate", "validate", "baseline"]
    input: Optional[Path] = None
    input_kind: Literal["points", "matrix"] = "matrix"
    norm: Norm = Norm.EUCLIDEAN
    objective: str = "kmedian"
    facility_costs: Optional[Path] = None
    k: Optional[int] = Field(default=None, ge=1)
    alpha: float = Field(default=DEFAULT_ALPHA, ge=1.0)
    seed: int = Field(default=0, ge=0)
    trials: int = Field(default=100, ge=1)
    eps: float = Field(default=DEFAULT_EPS, ge=0.0)
    output: Optional[Path] = None
    root: int = Field(default=0, ge=0)
    n: Optional[int] = Field(default=None, ge=1)
    margin: float = 4.0
    spread: float = 1.0
    dim: int = Field(default=1, ge=1)
    shrink_fraction: float = Field(default=DEFAULT_SHRINK_FRACTION, ge=0.0, le=1.0)
    matrix_out: Optional[Path] = None
    edges_out: Optional[Path] = None
    progress: bool = False

    @model_validator(mode="after")
    def _required_fields(self):
        missing = [name for name in REQUIRED[self.command] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"'{self.command}' needs {', '.join('--' + m.replace('_', '-') for m in missing)}")
        return self


def load_metric(config: RunConfig) -> MetricSpace:
    if config.input_kind == "points":
        return from_points(read_points_csv(config.input), norm=config.norm)
    return MetricSpace.from_matrix(read_matrix_csv(config.input), eps=config.eps)


def load_objective(config: RunConfig, n: int) -> Objective:
    costs = read_opening_costs(config.facility_costs) if config.facility_costs else None
    return builtin(config.objective, opening_costs=costs, n=n)


def _check_k(k: int, n: int):
    if k > n:
        raise InvalidParameterError(f"k={k} exceeds the number of points n={n}")


def _cluster(config: RunConfig) -> Dict[str, Any]:
    m = load_metric(config)
    _check_k(config.k, m.n)
    obj = load_objective(config, m.n)
    if config.root >= m.n:
        raise InvalidParameterError(f"root {config.root} out of range for n={m.n}")
    tree = kruskal(m)
    if config.edges_out:
        write_edges_csv(config.edges_out, tree)
    clustering = dp_cluster(root_and_binarize(tree, config.root), m, obj, config.k)
    baseline = single_linkage_baseline(m, config.k)
    return {
        "assignments": list(clustering.assignment),
        "centers": list(clustering.centers),
        "cost": clustering.cost,
        "objective": obj.name,
        "k": config.k,
        "baseline_agrees": baseline == clustering.assignment,
        "mst_weight": tree.total_weight,
    }


def _oracle(config: RunConfig) -> Dict[str, Any]:
    m = load_metric(config)
    _check_k(config.k, m.n)
    return brute_force_optimal(m, load_objective(config, m.n), config.k).model_dump()


def _probe(config: RunConfig) -> Dict[str, Any]:
    m = load_metric(config)
    _check_k(config.k, m.n)
    report = probe_resilience(m, load_objective(config, m.n), config.k, config.alpha, config.trials,
                              config.seed, shrink_fraction=config.shrink_fraction,
                              show_progress=config.progress)
    return report.model_dump()


def _generate(config: RunConfig) -> Dict[str, Any]:
    m, planted = generate_resilient_instance(config.n, config.k, config.margin, config.spread,
                                             config.seed, dim=config.dim)
    result: Dict[str, Any] = {"n": m.n, "k": config.k, "planted_assignment": list(planted)}
    if config.matrix_out is not None:
        write_matrix_csv(config.matrix_out, m.dist)
        result["matrix_path"] = str(config.matrix_out)
    else:
        result["matrix"] = m.dist
    return result


def _baseline(config: RunConfig) -> Dict[str, Any]:
    m = load_metric(config)
    _check_k(config.k, m.n)
    return {"assignments": list(single_linkage_baseline(m, config.k)), "k": config.k}


HANDLERS = {
    "cluster": _cluster,
    "oracle": _oracle,
    "probe": _probe,
    "generate": _generate,
    "baseline": _baseline,
}


def run(config: RunConfig) -> int:
    logger.info("running '%s'", config.command)
    document: Dict[str, Any] = {"command": config.command, "config": config.model_dump(mode="json")}
    status = EXIT_OK
    try:
        if config.command == "validate":
            if config.input_kind == "points":
                matrix = from_points(read_points_csv(config.input), norm=config.norm).dist
            else:
                matrix = read_matrix_csv(config.input)
            report = validate_metric(matrix, eps=config.eps)
            document["result"] = report
            if not report.ok:
                logger.warning("matrix is not a metric: %d violations", report.total)
                status = EXIT_INVALID
        else:
            document["result"] = HANDLERS[config.command](config)
    except (ClusteringError, OSError, RuntimeError) as e:
        logger.error("%s failed: %s", config.command, e)
        document["error"] = f"{type(e).__name__}: {e}"
        status = EXIT_ERROR
    write_report(document, config.output)
    return status
