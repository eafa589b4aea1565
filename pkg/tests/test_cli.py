import csv
import json

import pytest

from app.main import main
from app.utils.formats import read_metadata, read_system

SQUARE_CENTER = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]


@pytest.fixture
def square_file(write_csv) -> str:
    return write_csv("square.csv", SQUARE_CENTER)


@pytest.fixture
def write_system_file(tmp_path):
    def write(name: str, A, b) -> str:
        path = tmp_path / name
        rows = "".join(",".join(str(value) for value in row) + "\n" for row in A)
        path.write_text(rows + "\n" + ",".join(str(value) for value in b) + "\n")
        return str(path)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestMembershipCommand:
    def test_inside(self, capsys, square_file):
        code, out, _ = run(capsys, "membership", square_file, "0.3,0.6")
        assert code == 0
        assert "kind=ApproxSolution" in out.splitlines()

    def test_outside_exits_with_two(self, capsys, square_file):
        code, out, _ = run(capsys, "membership", square_file, "1.5,0.5")
        assert code == 2
        lines = out.splitlines()
        assert "kind=Witness" in lines
        assert "witness_valid=True" in lines

    def test_via_vertices(self, capsys, square_file):
        code, out, _ = run(capsys, "membership", square_file, "0.3,0.6", "--via-vertices", "--gamma", "0.4",
                           "--json")
        assert code == 0
        values = json.loads(out)
        assert values["via_vertices"] is True
        assert set(values["combination"]["weights"]) <= {"0", "1", "2", "3"}

    def test_via_vertices_needs_gamma(self, capsys, square_file):
        code, _, err = run(capsys, "membership", square_file, "0.3,0.6", "--via-vertices")
        assert code == 64
        assert "--gamma" in err

    def test_query_dimension_is_a_data_error(self, capsys, square_file):
        assert run(capsys, "membership", square_file, "0.3,0.6,0.1")[0] == 65


class TestVerticesCommand:
    def test_gamma(self, capsys, square_file):
        code, out, _ = run(capsys, "vertices", square_file, "--gamma", "0.4")
        assert code == 0
        assert out.splitlines()[0] == "0 1 2 3"

    def test_k(self, capsys, square_file):
        code, out, _ = run(capsys, "vertices", square_file, "--k", "4")
        assert code == 0
        assert out.splitlines()[0] == "0 1 2 3"
        assert "mode=K_search" in out.splitlines()

    def test_t(self, capsys, square_file):
        code, out, _ = run(capsys, "vertices", square_file, "--t", "0.3")
        assert code == 0
        assert "4" not in out.splitlines()[0].split()

    def test_json_is_deterministic(self, capsys, square_file):
        first = run(capsys, "vertices", square_file, "--gamma", "0.4", "--json", "--seed", "5")[1]
        second = run(capsys, "vertices", square_file, "--gamma", "0.4", "--json", "--seed", "5")[1]
        assert first == second
        assert json.loads(first)["indices"] == [0, 1, 2, 3]

    def test_report_file(self, capsys, square_file, tmp_path):
        report = tmp_path / "report.txt"
        code, out, _ = run(capsys, "vertices", square_file, "--gamma", "0.4", "--report", str(report))
        assert code == 0
        assert report.read_text() == out

    def test_robust(self, capsys, write_csv):
        path = write_csv("bump.csv", SQUARE_CENTER[:4] + [[1.001, 0.5]])
        code, out, _ = run(capsys, "vertices", path, "--gamma", "0.3", "--robust", "--sigma", "0.3",
                           "--eps-perturb", "0.01")
        assert code == 0
        assert out.splitlines()[0] == "0 1 2 3"
        assert "sigma_derived=False" in out.splitlines()

    def test_robust_sigma_from_gamma(self, capsys, square_file):
        code, out, _ = run(capsys, "vertices", square_file, "--gamma", "0.4", "--robust", "--eps-perturb", "0.01",
                           "--json")
        assert code == 0
        values = json.loads(out)
        # rho* = sqrt(2) / 2 and R = sqrt(2), so sigma = gamma / 2
        assert values["sigma_used"] == pytest.approx(0.2)
        assert values["rho_star"] == pytest.approx(0.5 ** 0.5)
        assert values["sigma_derived"] is True
        assert values["duplicates"] is False
        assert values["indices"] == [0, 1, 2, 3]

    def test_robust_gamma_is_not_a_sigma(self, capsys, write_csv):
        # rho* = 0.001 shrinks the derived sigma below 4 * eps-perturb
        path = write_csv("close.csv", SQUARE_CENTER + [[0.5, 0.501]])
        code, _, err = run(capsys, "vertices", path, "--gamma", "0.3", "--robust", "--eps-perturb", "0.01")
        assert code == 64
        assert "4 * epsilon <= sigma" in err

    def test_robust_duplicates_need_sigma(self, capsys, write_csv):
        path = write_csv("twice.csv", SQUARE_CENTER + [[0.5, 0.5]])
        code, _, err = run(capsys, "vertices", path, "--gamma", "0.4", "--robust", "--eps-perturb", "0.01")
        assert code == 64
        assert "--sigma" in err

    def test_robust_search_reaching_the_floor(self, capsys, write_csv):
        path = write_csv("bump.csv", SQUARE_CENTER[:4] + [[1.001, 0.5]])
        code, _, _ = run(capsys, "vertices", path, "--k", "6", "--robust", "--eps-perturb", "0.01")
        assert code == 70

    def test_project(self, capsys, square_file):
        code, out, _ = run(capsys, "vertices", square_file, "--gamma", "0.05", "--project", "5",
                           "--target-dim", "2", "--top", "4", "--json")
        assert code == 0
        values = json.loads(out)
        assert values["indices"] == [0, 1, 2, 3]
        assert len(values["round_seeds"]) == 5
        assert "4" not in values["frequencies"]

    @pytest.mark.parametrize("argv", [
        ["--gamma", "0.4", "--k", "3"],
        ["--gamma", "0.4", "--robust"],
        ["--gamma", "0.4", "--sigma", "0.2"],
        ["--k", "4", "--project", "3"],
        ["--gamma", "0.4", "--top", "2"],
        ["--gamma", "0.4", "--unknown"],
        [],
    ])
    def test_usage_errors(self, capsys, square_file, argv):
        assert run(capsys, "vertices", square_file, *argv)[0] == 64

    def test_gamma_out_of_range(self, capsys, square_file):
        assert run(capsys, "vertices", square_file, "--gamma", "1.5")[0] == 64

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "vertices", str(tmp_path / "absent.csv"), "--gamma", "0.4")
        assert code == 66
        assert "absent.csv" in err

    def test_malformed_file(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,0\n1\n")
        assert run(capsys, "vertices", str(path), "--gamma", "0.4")[0] == 65

    def test_run_log(self, capsys, square_file, tmp_path):
        log = tmp_path / "runs.jsonl"
        for _ in range(2):
            run(capsys, "--run-log", str(log), "vertices", square_file, "--gamma", "0.4", "--seed", "3")
        records = [json.loads(line) for line in log.read_text().splitlines()]
        assert len(records) == 2
        assert records[0]["command"] == "vertices"
        assert records[0]["seed"] == 3
        assert records[0]["exit_code"] == 0
        assert records[0]["counters"] == records[1]["counters"]

    def test_errors_are_logged_too(self, capsys, tmp_path):
        log = tmp_path / "runs.jsonl"
        run(capsys, "--run-log", str(log), "vertices", str(tmp_path / "absent.csv"), "--gamma", "0.4")
        assert json.loads(log.read_text())["exit_code"] == 66


class TestTopLevel:
    def test_missing_command(self, capsys):
        code, _, err = run(capsys)
        assert code == 64
        assert "usage" in err


class TestLpCommand:
    A = [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]

    def test_cone_feasible(self, capsys, write_system_file, tmp_path):
        path = write_system_file("system.csv", self.A, [1.0, 1.0])
        code, out, _ = run(capsys, "lp", path, "--cone", "--gamma", "0.3")
        assert code == 0
        assert out.splitlines()[0] == "0 1"
        assert "verdict=feasible" in out.splitlines()
        reduced = read_system(tmp_path / "system.reduced.csv")
        assert reduced.A.shape == (2, 2)

    def test_cone_infeasible(self, capsys, write_system_file):
        path = write_system_file("system.csv", self.A, [-1.0, 0.0])
        code, out, _ = run(capsys, "lp", path, "--cone", "--gamma", "0.3")
        assert code == 2
        assert "reason=anchor-separates" in out.splitlines()

    def test_feasibility(self, capsys, write_system_file, tmp_path):
        path = write_system_file("system.csv", self.A, [1.0, 1.0])
        output = tmp_path / "out.csv"
        code, out, _ = run(capsys, "lp", path, "--feasibility", "--gamma", "0.3", "--output", str(output))
        assert code == 0
        assert "verdict=feasible" in out.splitlines()
        assert read_system(output).n == 3

    def test_optimize(self, capsys, tmp_path):
        path = tmp_path / "system.csv"
        path.write_text("1,1,0\n0,0,1\n\n1,1\n\n3,3,1\n")
        code, out, _ = run(capsys, "lp", str(path), "--optimize", "--gamma", "0.2", "--dedup", "--json")
        assert code == 0
        values = json.loads(out)
        assert values["value"] == pytest.approx(4.0)
        assert values["indices"] == [0, 2]

    def test_anchor_error_is_a_data_error(self, capsys, write_system_file):
        path = write_system_file("system.csv", [[1.0, -1.0], [0.0, 0.0]], [1.0, 0.0])
        code, _, err = run(capsys, "lp", path, "--cone", "--gamma", "0.3")
        assert code == 65
        assert "--anchor" in err

    def test_gamma_is_required(self, capsys, write_system_file):
        path = write_system_file("system.csv", self.A, [1.0, 1.0])
        assert run(capsys, "lp", path, "--cone")[0] == 64


class TestGenCommand:
    def test_hull_instance_round_trip(self, capsys, tmp_path):
        out_path = tmp_path / "hull.csv"
        code, _, _ = run(capsys, "gen", "hull", "--K", "5", "--n", "30", "--m", "3", "--seed", "3",
                         "--out", str(out_path))
        assert code == 0
        metadata = read_metadata(tmp_path / "hull.csv.meta")
        truth = json.loads(metadata["vertex_indices"])
        assert len(truth) == 5

        code, out, _ = run(capsys, "vertices", str(out_path), "--k", "5", "--seed", "3")
        assert code == 0
        assert out.splitlines()[0] == " ".join(str(index) for index in truth)

    def test_binary_output(self, capsys, tmp_path):
        out_path = tmp_path / "hull.bin"
        assert run(capsys, "gen", "hull", "--K", "3", "--n", "10", "--m", "2", "--binary",
                   "--out", str(out_path))[0] == 0
        assert out_path.read_bytes().startswith(b"AVTA1")

    def test_cone_instance(self, capsys, tmp_path):
        out_path = tmp_path / "cone.csv"
        assert run(capsys, "gen", "cone", "--K", "3", "--n", "12", "--m", "3", "--out", str(out_path))[0] == 0
        assert read_system(out_path).A.shape == (3, 12)

    def test_same_seed_same_file(self, capsys, tmp_path):
        paths = [tmp_path / "first.csv", tmp_path / "second.csv"]
        for path in paths:
            run(capsys, "gen", "hull", "--K", "4", "--n", "20", "--m", "3", "--seed", "8", "--out", str(path))
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_k_above_n(self, capsys, tmp_path):
        code = run(capsys, "gen", "hull", "--K", "5", "--n", "3", "--m", "2", "--out", str(tmp_path / "x.csv"))[0]
        assert code == 65


class TestBenchCommand:
    def test_vertex_scaling(self, capsys, tmp_path):
        code, out, _ = run(capsys, "bench", "vertex-scaling", "--sizes", "20,30", "--k", "3", "--m", "2",
                           "--out-dir", str(tmp_path))
        assert code == 0
        with open(tmp_path / "vertex-scaling.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert [row["n"] for row in rows] == ["20", "30"]
        assert all(int(row["vertices"]) >= 3 for row in rows)
        assert (tmp_path / "vertex-scaling.plot.dat").read_text().startswith("# vertex-scaling")

    def test_counter_columns_are_reproducible(self, capsys, tmp_path):
        tables = []
        for name in ("a", "b"):
            out_dir = tmp_path / name
            run(capsys, "bench", "membership-scaling", "--sizes", "30", "--k", "4", "--m", "3", "--queries", "4",
                "--out-dir", str(out_dir), "--seed", "2")
            with open(out_dir / "membership-scaling.csv", newline="") as handle:
                tables.append(list(csv.DictReader(handle)))
        for column in ("vertices", "membership_calls", "direct_iterations", "avta_iterations"):
            assert tables[0][0][column] == tables[1][0][column]

    def test_cell_guard(self, capsys, tmp_path):
        code = run(capsys, "bench", "vertex-scaling", "--sizes", "1000", "--max-cells", "10",
                   "--out-dir", str(tmp_path))[0]
        assert code == 64
