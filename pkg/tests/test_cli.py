import csv
import io
import json

import pytest

from semitree.cli import SCHEMA_VERSION, run, to_jsonable


def call(capsys, *argv):
    status = run(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def test_spherical_rows(capsys):
    status, out, _ = call(capsys, "spherical", "--qplus", "2", "--qminus", "3", "--gamma", "0", "--levels", "4")
    body = json.loads(out)
    assert status == 0
    assert body["schema_version"] == SCHEMA_VERSION
    assert [(r["n"], r["value"]) for r in body["rows"]] == [(0, "1"), (1, "0"), (2, "-1/3"), (3, "0"), (4, "1/9")]


def test_spherical_csv(capsys):
    _, out, _ = call(capsys, "spherical", "--gamma", "1/2", "--levels", "3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["value"] for r in rows] == ["1", "1/2", "0", "-1/4"]


def test_classify_record(capsys):
    _, out, _ = call(capsys, "classify", "--gamma", "0")
    body = json.loads(out)
    assert body["bounded"] and body["growth"] == "1/3"
    _, out, _ = call(capsys, "classify", "--gamma", "1")
    assert json.loads(out)["lp_exponent"] == "inf"


def test_spectrum_homogeneous(capsys):
    _, out, _ = call(capsys, "spectrum", "--qplus", "3", "--qminus", "3")
    body = json.loads(out)
    assert body["s1_real"][1] == pytest.approx(1, abs=1e-9)
    assert body["s2_real"][1] == pytest.approx(0.866025, abs=1e-6)
    assert body["atom_at_zero"] is False


def test_lp_scan_csv(capsys):
    _, out, _ = call(capsys, "lp-scan", "--gamma", "0", "--pmin", "1.5", "--pmax", "2", "--steps", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["status"] for r in rows] == ["diverging", "converged"]


def test_gram_witness(capsys):
    status, out, _ = call(capsys, "gram", "--gamma", "3/2", "--depth", "2")
    body = json.loads(out)
    assert status == 0
    assert body["positive_definite"]["passed"] is False
    assert body["positive_definite"]["witness"] == ["", "0/0"]


def test_posdef_scan(capsys):
    _, out, _ = call(capsys, "posdef-scan", "--gamma-grid", "19/20:21/20:1/20", "--format", "json")
    rows = json.loads(out)["rows"]
    assert [(r["gamma"], r["positive_definite"]) for r in rows] == [("19/20", True), ("1", True), ("21/20", False)]


def test_walk_report(capsys):
    _, out, _ = call(capsys, "walk", "--steps", "2", "--trials", "1000", "--gamma", "0")
    body = json.loads(out)
    assert [r["exact_mass"] for r in body["rows"]] == ["1/4", "0", "3/4"]
    assert body["martingale"]["exact_expectation"] == "0"


def test_polynomials(capsys):
    _, out, _ = call(capsys, "polynomials", "--nmax", "2")
    rows = json.loads(out)["rows"]
    assert rows[2]["P"] == ["-1/6", "-1/3", "3/2"]


def test_verify_algebra_pass(capsys):
    status, out, _ = call(capsys, "verify", "algebra", "--depth", "12", "--nmax", "4")
    body = json.loads(out)
    assert status == 0 and body["verdict"] == "PASS"
    residuals = [c["value"] for c in body["checks"] if c["name"].startswith(("mu2_", "mu1_"))]
    assert residuals and all(r == "0" for r in residuals)


def test_verify_isometries_pass(capsys):
    status, out, _ = call(capsys, "verify", "isometries", "--depth", "6", "--samples", "20")
    assert status == 0 and json.loads(out)["passed"]


def test_verify_failure_exit_code(capsys, monkeypatch):
    from semitree import verify

    def broken(params, **kw):
        rep = verify.SuiteReport("spherical", params)
        rep.add("forced", False, 1, (0, 1))
        return rep

    monkeypatch.setitem(verify.SUITES, "spherical", broken)
    status, out, _ = call(capsys, "verify", "spherical")
    body = json.loads(out)
    assert status == 1 and body["verdict"] == "FAIL"
    assert body["failures"][0]["witness"] == "0/1"


@pytest.mark.parametrize(
    "argv",
    [
        ["nope"],
        ["spherical"],
        ["spherical", "--gamma", "abc"],
        ["classify", "--gamma", "0.3j", "--mode", "exact"],
        ["spherical", "--gamma", "0", "--qplus", "1"],
        ["spectrum", "--tol", "-1"],
        ["posdef-scan", "--gamma-grid", "1:0:1"],
        ["walk", "--trials", "0"],
    ],
)
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(run(argv))
    assert exc.value.code == 2


def test_byte_identical_reports(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SEMITREE_OUTPUT_DIR", str(tmp_path))
    argv = ["walk", "--steps", "4", "--trials", "5000", "--seed", "3", "--gamma", "1/2"]
    assert run(argv + ["--output", "a.json"]) == 0
    assert run(argv + ["--output", "b.json"]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_jsonable_conventions():
    from fractions import Fraction

    assert to_jsonable(Fraction(-2, 6)) == "-1/3"
    assert to_jsonable(float("inf")) == "inf"
    assert to_jsonable((0, 2, 1)) == "0/2/1"
    assert to_jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}


def test_verify_all_gate(capsys):
    status, out, _ = call(capsys, "verify", "all", "--trials", "20000")
    body = json.loads(out)
    assert status == 0
    assert {s["suite"] for s in body["suites"]} == {"isometries", "algebra", "spherical", "posdef", "spectra", "walk"}
    assert all(s["passed"] for s in body["suites"])
