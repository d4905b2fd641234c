import json
import subprocess
import sys

import pytest

import spun.clifford
from spun.cli import main, parse_rational_list, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestVerify:
    def test_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--dim", "3", "--trials", "5", "--seed", "1")
        assert code == 0
        assert "all checks passed" in out
        assert "[FAIL]" not in out

    def test_dimension_guard(self, capsys):
        code, _, err = run(capsys, "verify", "--dim", "7")
        assert code == 2 and "--allow-large" in err

    def test_json(self, capsys):
        code, out, _ = run(capsys, "verify", "--dim", "2", "--trials", "3", "--suite", "algebra",
                           "--format", "json")
        obj = json.loads(out)
        assert code == 0 and obj["ok"] and obj["checks"]

    def test_corrupted_sign_table_fails(self, capsys, monkeypatch):
        real = spun.clifford.blade_product

        def broken(d, a, b):
            s, m = real(d, a, b)
            return (-s if (a, b) == (0b1, 0b10) else s), m

        monkeypatch.setattr(spun.clifford, "blade_product", broken)
        code, out, _ = run(capsys, "verify", "--dim", "3", "--trials", "5", "--suite", "algebra")
        assert code == 1
        assert "[FAIL]" in out


class TestFlat:
    def test_trivial_system(self, capsys):
        code, out, _ = run(capsys, "flat", "--dim", "2", "--a", "0,0", "--p", "0,0")
        assert code == 0
        assert out.splitlines()[0] == "2x_{1,3} = 0; 2x_{2,3} = 0"
        assert "cross-check: PASS" in out

    def test_worked_d3(self, capsys):
        code, out, _ = run(capsys, "flat", "--dim", "3", "--a", "1,0,0", "--p", "0,1,0")
        assert out.splitlines()[0] == (
            "x_{1,2} + 2x_{1,4} = 1; -x_{1,2} + 2x_{2,4} = -1; -x_{1,3} - x_{2,3} + 2x_{3,4} = 0"
        )

    def test_json(self, capsys):
        code, out, _ = run(capsys, "flat", "--dim", "2", "--a", "1/2,0", "--p", "0,1", "--format", "json")
        obj = json.loads(out)
        assert code == 0 and obj["cross_check"]
        assert obj["system"]["rows"][0]["rhs"] == "1/2"
        assert obj["flat"]["ambient"] == 3

    def test_parse_error_position(self, capsys):
        code, _, err = run(capsys, "flat", "--dim", "2", "--a", "0, 1.5", "--p", "0,0")
        assert code == 2 and "column 4" in err

    def test_wrong_length(self, capsys):
        code, _, err = run(capsys, "flat", "--dim", "3", "--a", "0,0", "--p", "0,0,0")
        assert code == 2 and "expected 3" in err


def test_parse_rational_list():
    assert parse_rational_list("1, -2/3,0") == [1, pytest.approx(-2 / 3), 0]
    with pytest.raises(UsageError, match="column 3"):
        parse_rational_list("1,,2")
    with pytest.raises(UsageError, match="column 1"):
        parse_rational_list("1/0")


class TestLatticeAndReduce:
    def test_round_trip(self, capsys, tmp_path):
        pts = tmp_path / "grid.json"
        rep = tmp_path / "report.json"
        assert run(capsys, "gen-lattice", "--dim", "2", "--side", "2", "--output", str(pts))[0] == 0
        assert json.loads(pts.read_text())["points"][1] == ["0", "1"]
        code, out, _ = run(capsys, "reduce", "--input", str(pts), "--seed", "1", "--output", str(rep))
        assert code == 0
        obj = json.loads(rep.read_text())
        assert obj["Q"] == "80" and obj["D"] == "2"
        assert "[PASS] A" in out

    def test_byte_deterministic(self, capsys, tmp_path):
        pts = tmp_path / "grid.json"
        run(capsys, "gen-lattice", "--dim", "2", "--side", "3", "--output", str(pts))
        outs = []
        for k in range(2):
            rep = tmp_path / f"r{k}.json"
            run(capsys, "reduce", "--input", str(pts), "--seed", "9", "--output", str(rep))
            outs.append(rep.read_bytes())
        assert outs[0] == outs[1]

    def test_lattice_sizes_and_cap(self, capsys):
        code, out, _ = run(capsys, "gen-lattice", "--dim", "3", "--side", "2")
        assert code == 0 and len(json.loads(out)["points"]) == 8
        code, out, _ = run(capsys, "gen-lattice", "--dim", "2", "--side", "3")
        assert len(json.loads(out)["points"]) == 9
        code, _, err = run(capsys, "gen-lattice", "--dim", "3", "--side", "5")
        assert code == 2 and "125" in err
        code, out, _ = run(capsys, "gen-lattice", "--dim", "3", "--side", "5", "--allow-large")
        assert code == 0 and len(json.loads(out)["points"]) == 125

    def test_two_points_report(self, capsys, tmp_path):
        pts = tmp_path / "two.json"
        pts.write_text(json.dumps({"dimension": 2, "points": [["0", "0"], ["1", "0"]]}))
        rep = tmp_path / "r.json"
        code, _, _ = run(capsys, "reduce", "--input", str(pts), "--output", str(rep))
        obj = json.loads(rep.read_text())
        assert obj["Q"] == "4" and obj["Q_prime"] == "2" and obj["histogram"] == {}
        # the strict Cauchy-Schwarz verdict is an equality at n = 2
        assert obj["verdicts"]["C"] is False and code == 1

    def test_malformed_json(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"dimension": 2, "points": [')
        code, _, err = run(capsys, "reduce", "--input", str(bad))
        assert code == 2 and "line 1 column" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "reduce", "--input", str(tmp_path / "nope.json"))
        assert code == 2 and "cannot read" in err

    def test_reduce_dimension_guard(self, capsys, tmp_path):
        pts = tmp_path / "d5.json"
        pts.write_text(json.dumps({"dimension": 5, "points": [["0"] * 5, ["1"] + ["0"] * 4]}))
        code, _, err = run(capsys, "reduce", "--input", str(pts))
        assert code == 2 and "[2, 4]" in err


def test_eta_inverse(capsys):
    code, out, _ = run(capsys, "eta-inverse", "--dim", "2", "--point", "1,1/2,-3")
    assert code == 0
    assert "lift: 1 + e1e2 + 1/2 e1e3e4 - 3 e2e3e4" in out
    assert "round-trip: PASS" in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "spun", "flat", "--dim", "2", "--a", "0,0", "--p", "0,0"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.startswith("2x_{1,3} = 0; 2x_{2,3} = 0")
