import json

import pytest

from fkq.cli import main


@pytest.fixture
def run(capsys):
    def invoke(*argv):
        code = main(list(argv))
        out = capsys.readouterr().out
        return code, out

    return invoke


class TestFk:
    def test_golden_truncation(self, run):
        code, out = run("fk", "--knot", "T(2,3)", "--mmax", "11")
        assert code == 0
        doc = json.loads(out)
        assert doc["knot"] == "T(2,3)"
        assert doc["mMax"] == 11
        assert ["11/2", "5", "-1/2"] in doc["terms"]
        assert doc["qWindow"] == ["-inf", "6"]

    def test_validation_exit_code(self, run):
        code, out = run("fk", "--knot", "T(4,6)", "--mmax", "5")
        assert code == 2
        assert json.loads(out)["error"]["type"] == "InvalidTorusParams"

    def test_syntax_error(self, run):
        code, out = run("fk", "--knot", "T(2,3)#", "--mmax", "5")
        assert code == 2
        assert json.loads(out)["error"]["type"] == "KnotSyntaxError"

    def test_smallest_bound(self, run):
        # T(2,5) contributes nothing at m=1, so the product truncation is empty
        code, out = run("fk", "--knot", "T(2,3)#T(2,5)", "--mmax", "1")
        assert code == 0
        doc = json.loads(out)
        assert doc["terms"] == []
        assert doc["mMax"] == 1

    def test_deterministic_output(self, run):
        _, first = run("fk", "--knot", "T(2,3)#T(2,5)", "--mmax", "9")
        _, second = run("fk", "--knot", "T(2,3)#T(2,5)", "--mmax", "9")
        assert first == second


class TestJones:
    def test_trefoil_color_two(self, run):
        code, out = run("jones", "--knot", "T(2,3)", "--color", "2")
        assert code == 0
        doc = json.loads(out)
        assert doc["terms"] == [
            ["0", "-4", "-1"],
            ["0", "-3", "1"],
            ["0", "-1", "1"],
        ]

    def test_composite(self, run):
        code, out = run("jones", "--knot", "T(2,3)#T(2,3)", "--color", "1")
        assert code == 0
        assert json.loads(out)["terms"] == [["0", "0", "1"]]


class TestRecursion:
    def test_bundled_sweep_json(self, run):
        code, out = run(
            "recursion", "--knot", "T(2,3)#T(2,3)",
            "--mmax-list", "24,48", "--x-powers", "0",
        )
        assert code == 0
        doc = json.loads(out)
        rows = doc["perXPower"]["0"]
        assert [r["mMax"] for r in rows] == [24, 48]
        assert rows[0]["minSurvivingQ"] == "5"
        assert rows[1]["minSurvivingQ"] == "89"

    def test_csv_format(self, run):
        code, out = run(
            "recursion", "--knot", "T(2,3)#T(2,3)",
            "--mmax-list", "24,48", "--x-powers", "0,1", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "xPower,mMax,minSurvivingQ"
        assert len(lines) == 5

    def test_missing_apoly(self, run):
        code, out = run("recursion", "--knot", "T(2,3)#T(2,5)")
        assert code == 2
        assert json.loads(out)["error"]["type"] == "MissingAPoly"

    def test_threads_flag(self, run):
        code, out = run(
            "recursion", "--knot", "T(2,3)#T(2,3)",
            "--mmax-list", "12,24", "--x-powers", "0", "--threads", "2",
        )
        assert code == 0
        _, sequential = run(
            "recursion", "--knot", "T(2,3)#T(2,3)",
            "--mmax-list", "12,24", "--x-powers", "0", "--threads", "1",
        )
        assert out == sequential


class TestGaps:
    def test_gap_csv(self, run):
        code, out = run(
            "gaps", "--knot", "T(2,3)#T(2,3)",
            "--mmax-list", "12,24", "--q-powers", "0,1", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "qPower,mMax,posGapWidth,negGapWidth"
        assert len(lines) == 5


class TestWrt:
    def test_surgery_json(self, run):
        code, out = run("wrt", "--knot", "T(2,3)#T(2,3)", "--k", "4")
        assert code == 0
        doc = json.loads(out)
        assert doc["p"] == -1
        assert abs(doc["Zcs"][0] - 0.5) < 1e-12
        assert abs(doc["Zcs"][1]) < 1e-12
        assert doc["precisionBits"] == 256

    def test_level_validation(self, run):
        code, out = run("wrt", "--knot", "T(2,3)#T(2,3)", "--k", "2")
        assert code == 2
        assert json.loads(out)["error"]["type"] == "InvalidTorusParams"


class TestCompare:
    def test_reduced_profile(self, run):
        code, out = run(
            "compare", "--knot", "T(2,3)#T(2,3)", "--k", "3",
            "--n", "2000", "--method", "partial-sum-average",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["absError"] < 0.1

    def test_diagnostics_csv(self, run):
        code, out = run(
            "zhat-limit", "--knot", "T(2,3)#T(2,3)", "--k", "3",
            "--n", "2000", "--method", "partial-sum-average", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "index,re,im"
        assert len(lines) >= 3
