import numpy as np
import pytest

from src.errors import InputFormatError
from src.ingest.csv_io import (
    read_matrix_csv,
    read_opening_costs,
    read_points_csv,
    write_edges_csv,
    write_matrix_csv,
    write_points_csv,
)
from src.solver.mst import kruskal
from tests.conftest import random_points


def test_reads_sample_matrix():
    dist = read_matrix_csv("data/line4.csv")
    assert dist.shape == (4, 4)
    assert dist[1, 2] == 9.0


def test_reads_sample_points():
    points = read_points_csv("data/line4_points.csv")
    assert points.tolist() == [[0.0], [1.0], [10.0], [11.0]]


def test_matrix_write_is_exact(tmp_path):
    points = random_points(6, seed=2)
    dist = np.sqrt(((points[:, None] - points[None]) ** 2).sum(axis=2))
    path = tmp_path / "m.csv"
    write_matrix_csv(path, dist)
    assert np.array_equal(read_matrix_csv(path), dist)


def test_points_write_is_exact(tmp_path):
    points = random_points(5, seed=3, dim=3)
    path = tmp_path / "p.csv"
    write_points_csv(path, points)
    assert path.read_text().splitlines()[0] == "x1,x2,x3"
    assert np.array_equal(read_points_csv(path), points)


def test_row_length_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1,2\n1,0\n2,1,0\n")
    with pytest.raises(InputFormatError, match=":2:"):
        read_matrix_csv(path)


def test_non_numeric_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,one\n1,0\n")
    with pytest.raises(InputFormatError, match="'one'"):
        read_matrix_csv(path)


def test_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("\n")
    with pytest.raises(InputFormatError):
        read_matrix_csv(path)


@pytest.mark.parametrize("text", ["a,b\n1,2\n", "x1,x2\n", "x1,x2\n1,2\n3\n", "x2\n1\n"])
def test_bad_points_files(tmp_path, text):
    path = tmp_path / "p.csv"
    path.write_text(text)
    with pytest.raises(InputFormatError):
        read_points_csv(path)


def test_opening_costs(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("1.5\n2\n\n0\n")
    assert read_opening_costs(path).tolist() == [1.5, 2.0, 0.0]
    path.write_text("1,2\n")
    with pytest.raises(InputFormatError):
        read_opening_costs(path)


def test_edges_dump(tmp_path, line4):
    path = tmp_path / "edges.csv"
    write_edges_csv(path, kruskal(line4))
    assert path.read_text() == "i,j,weight\n0,1,1.0\n2,3,1.0\n1,2,9.0\n"


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_matrix_csv(tmp_path / "nope.csv")
