import json

import pytest

import launcher
from src.cli.runner import RunConfig, run
from src.report.json_report import render


def run_cli(capsys, *argv):
    status = launcher.main(list(argv))
    out = capsys.readouterr().out
    return status, (json.loads(out) if out else None), out


class TestCommands:
    def test_cluster_line4(self, capsys):
        status, doc, _ = run_cli(capsys, "cluster", "--input", "data/line4.csv", "--input-kind", "matrix",
                                 "--objective", "kmedian", "--k", "2")
        assert status == 0
        result = doc["result"]
        assert result["assignments"] == [1, 1, 2, 2]
        assert result["centers"] == [0, 2]
        assert result["cost"] == 2.0
        assert result["objective"] == "kmedian"
        assert result["baseline_agrees"] is True
        assert result["mst_weight"] == 11.0
        assert doc["config"]["alpha"] == 2.0
        assert doc["config"]["seed"] == 0

    def test_cluster_from_points(self, capsys):
        status, doc, _ = run_cli(capsys, "cluster", "--input", "data/line4_points.csv",
                                 "--input-kind", "points", "--objective", "kcenter", "--k", "2")
        assert status == 0
        assert doc["result"]["cost"] == 1.0

    def test_facility_costs(self, capsys, tmp_path):
        costs = tmp_path / "f.csv"
        costs.write_text("1\n2\n3\n4\n")
        status, doc, _ = run_cli(capsys, "cluster", "--input", "data/line4.csv", "--objective",
                                 "facility_location", "--facility-costs", str(costs), "--k", "2")
        assert status == 0
        assert doc["result"]["cost"] == 6.0

    def test_oracle(self, capsys):
        status, doc, _ = run_cli(capsys, "oracle", "--input", "data/line4.csv", "--k", "2")
        assert status == 0
        assert doc["result"]["optimal_partitions"] == [[1, 1, 2, 2]]
        assert doc["result"]["unique"] is True

    def test_probe(self, capsys):
        status, doc, _ = run_cli(capsys, "probe", "--input", "data/line4.csv", "--k", "2", "--alpha", "2",
                                 "--trials", "100", "--seed", "1")
        assert status == 0
        assert doc["result"]["certified"] is True
        assert doc["result"]["first_failure"] is None
        assert doc["result"]["holds"] is True
        assert doc["result"]["violations"] == []

    def test_certification_lists_proximity_violations(self, capsys, tmp_path):
        points = tmp_path / "fragile.csv"
        points.write_text("x1\n0\n1\n4\n10\n")
        status, doc, _ = run_cli(capsys, "probe", "--input", str(points), "--input-kind", "points",
                                 "--k", "2", "--alpha", "3", "--trials", "5")
        assert status == 0
        result = doc["result"]
        assert result["holds"] is False
        assert result["certified"] is False
        assert result["violations"] == [{"p": 2, "i": 1, "j": 2, "dpi": 3.0, "dpj": 6.0}]

    def test_validate_ok(self, capsys):
        status, doc, _ = run_cli(capsys, "validate", "--input", "data/line4.csv")
        assert status == 0
        assert doc["result"]["ok"] is True

    def test_validate_triangle_violation(self, capsys):
        status, doc, _ = run_cli(capsys, "validate", "--input", "data/triangle_violation.csv")
        assert status == 2
        assert doc["result"]["ok"] is False
        assert doc["result"]["violations"][0]["kind"] == "triangle"
        assert doc["result"]["violations"][0]["indices"] == [0, 2, 1]

    def test_baseline(self, capsys):
        status, doc, _ = run_cli(capsys, "baseline", "--input", "data/line4.csv", "--k", "2")
        assert status == 0
        assert doc["result"]["assignments"] == [1, 1, 2, 2]

    def test_generate_writes_matrix(self, capsys, tmp_path):
        out = tmp_path / "planted.csv"
        status, doc, _ = run_cli(capsys, "generate", "--n", "12", "--k", "3", "--margin", "4", "--seed", "42",
                                 "--matrix-out", str(out))
        assert status == 0
        assert len(doc["result"]["planted_assignment"]) == 12
        assert len(out.read_text().splitlines()) == 12

        status, doc, _ = run_cli(capsys, "probe", "--input", str(out), "--k", "3", "--trials", "20", "--seed", "3")
        assert doc["result"]["certified"] is True

    def test_cluster_dumps_tree_edges(self, capsys, tmp_path):
        edges = tmp_path / "edges.csv"
        status, doc, _ = run_cli(capsys, "cluster", "--input", "data/line4.csv", "--k", "2",
                                 "--edges-out", str(edges))
        assert status == 0
        assert doc["config"]["edges_out"] == str(edges)
        assert edges.read_text() == "i,j,weight\n0,1,1.0\n2,3,1.0\n1,2,9.0\n"

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "out.json"
        status, doc, _ = run_cli(capsys, "baseline", "--input", "data/line4.csv", "--k", "4",
                                 "--output", str(target))
        assert status == 0 and doc is None
        assert json.loads(target.read_text())["result"]["assignments"] == [1, 2, 3, 4]


class TestErrors:
    def test_k_larger_than_n(self, capsys):
        status, doc, _ = run_cli(capsys, "cluster", "--input", "data/line4.csv", "--k", "5")
        assert status == 1
        assert "InvalidParameterError" in doc["error"]

    def test_unknown_objective(self, capsys):
        status, doc, _ = run_cli(capsys, "cluster", "--input", "data/line4.csv", "--k", "2", "--objective", "median")
        assert status == 1
        assert "ObjectiveError" in doc["error"]

    def test_oracle_cap(self, capsys, tmp_path):
        out = tmp_path / "big.csv"
        run_cli(capsys, "generate", "--n", "15", "--k", "3", "--matrix-out", str(out))
        status, doc, _ = run_cli(capsys, "oracle", "--input", str(out), "--k", "3")
        assert status == 1
        assert "OracleCapExceeded" in doc["error"]

    def test_malformed_csv(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("0,1\n1\n")
        status, doc, _ = run_cli(capsys, "cluster", "--input", str(bad), "--k", "1")
        assert status == 1
        assert "InputFormatError" in doc["error"]

    def test_negative_seed(self, capsys):
        with pytest.raises(ValueError):
            RunConfig(command="probe", input="data/line4.csv", k=2, seed=-5, trials=2)
        status, doc, _ = run_cli(capsys, "probe", "--input", "data/line4.csv", "--k", "2", "--seed", "-5")
        assert status == 1 and doc is None

    def test_missing_required_flag(self, capsys):
        assert launcher.main(["cluster", "--input", "data/line4.csv"]) == 1

    def test_usage_error_exits_one(self):
        with pytest.raises(SystemExit) as exc:
            launcher.main(["cluster", "--k", "two"])
        assert exc.value.code == 1

    def test_run_config_validation(self):
        with pytest.raises(ValueError):
            RunConfig(command="cluster", input="data/line4.csv", k=2, alpha=0.5)
        with pytest.raises(ValueError):
            RunConfig(command="generate", k=2)


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["cluster", "--input", "data/line4.csv", "--k", "2"],
        ["probe", "--input", "data/line4.csv", "--k", "2", "--trials", "30", "--seed", "4"],
        ["generate", "--n", "10", "--k", "2", "--seed", "8"],
    ])
    def test_byte_identical(self, capsys, argv):
        _, _, first = run_cli(capsys, *argv)
        _, _, second = run_cli(capsys, *argv)
        assert first == second

    def test_run_returns_status(self, tmp_path):
        target = tmp_path / "o.json"
        assert run(RunConfig(command="validate", input="data/line4.csv", output=target)) == 0

    def test_render_nulls_non_finite(self):
        assert render({"x": float("inf"), "y": [1.5, float("nan")]}) == '{\n  "x": null,\n  "y": [\n    1.5,\n    null\n  ]\n}\n'
