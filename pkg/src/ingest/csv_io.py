#!/usr/bin/env python3
"""
csv_io.py

Plain CSV readers and writers for distance matrices, point sets, opening costs and
spanning-tree edge dumps.

Formats:
  matrix        n rows of n comma-separated decimals, no header
  points        header x1,...,xd then one point per row
  opening costs one decimal per line, line i = f(point i)
  edges         header i,j,weight then one tree edge per row, in insertion order
Floats are written with Python's shortest round-trip repr.
"""

import csv
import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from src.errors import InputFormatError
from src.solver.mst import SpanningTree

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _rows(path: PathLike) -> List[Tuple[int, List[str]]]:
    """Non-blank rows with their 1-based line numbers."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            return [(n, [cell.strip() for cell in row])
                    for n, row in enumerate(csv.reader(f), start=1)
                    if any(cell.strip() for cell in row)]
    except UnicodeDecodeError as e:
        raise InputFormatError(f"{path}: not a UTF-8 text file ({e})")


def _parse_floats(path: PathLike, line: int, cells: List[str]) -> List[float]:
    try:
        return [float(cell) for cell in cells]
    except ValueError:
        bad = next(cell for cell in cells if not _is_number(cell))
        raise InputFormatError(f"{path}:{line}: '{bad}' is not a decimal number")


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _fmt(x: float) -> str:
    return repr(float(x))


def read_matrix_csv(path: PathLike) -> np.ndarray:
    rows = _rows(path)
    if not rows:
        raise InputFormatError(f"{path}: empty matrix file")
    n = len(rows)
    values = []
    for line, cells in rows:
        if len(cells) != n:
            raise InputFormatError(f"{path}:{line}: expected {n} values (square matrix), got {len(cells)}")
        values.append(_parse_floats(path, line, cells))
    logger.debug("read %dx%d matrix from %s", n, n, path)
    return np.array(values, dtype=np.float64)


def read_points_csv(path: PathLike) -> np.ndarray:
    rows = _rows(path)
    if not rows:
        raise InputFormatError(f"{path}: empty points file")
    line, header = rows[0]
    expected = [f"x{i}" for i in range(1, len(header) + 1)]
    if header != expected:
        raise InputFormatError(f"{path}:{line}: header must be {','.join(expected)}, got {','.join(header)}")
    if len(rows) == 1:
        raise InputFormatError(f"{path}: no points below the header")
    d = len(header)
    points = []
    for line, cells in rows[1:]:
        if len(cells) != d:
            raise InputFormatError(f"{path}:{line}: expected {d} coordinates, got {len(cells)}")
        points.append(_parse_floats(path, line, cells))
    logger.debug("read %d points of dimension %d from %s", len(points), d, path)
    return np.array(points, dtype=np.float64)


def read_opening_costs(path: PathLike) -> np.ndarray:
    costs = []
    for line, cells in _rows(path):
        if len(cells) != 1:
            raise InputFormatError(f"{path}:{line}: expected one opening cost per line, got {len(cells)} values")
        costs.extend(_parse_floats(path, line, cells))
    if not costs:
        raise InputFormatError(f"{path}: no opening costs")
    return np.array(costs, dtype=np.float64)


def write_matrix_csv(path: PathLike, dist: np.ndarray):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in np.asarray(dist, dtype=np.float64):
            writer.writerow([_fmt(x) for x in row])


def write_points_csv(path: PathLike, points: np.ndarray):
    coords = np.asarray(points, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(1, coords.shape[1] + 1)])
        for row in coords:
            writer.writerow([_fmt(x) for x in row])


def write_edges_csv(path: PathLike, tree: SpanningTree):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["i", "j", "weight"])
        for i, j, w in tree.edges:
            writer.writerow([i, j, _fmt(w)])
