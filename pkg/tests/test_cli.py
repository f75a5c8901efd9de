import io
import json
import subprocess
import sys

import pytest

from eds.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    sysf = tmp_path / "cartan.json"
    sysf.write_text(json.dumps({"solved": {"r": "t^3/3", "s": "t^2/2"}, "parameter": "t"}), encoding="utf-8")
    pts = tmp_path / "pts.json"
    pts.write_text(json.dumps([{"x": 0, "y": 0, "z": 0, "p": 0, "q": 0, "t": 1},
                               {"x": 1, "y": "1/2", "z": 0, "p": 2, "q": -1, "t": 3}]), encoding="utf-8")
    bad = tmp_path / "malformed.json"
    bad.write_text(json.dumps({"solved": {"r": "t^3/", "s": "0"}, "parameter": "t"}), encoding="utf-8")
    return sysf, pts, bad


def test_classify_cartan(files):
    sysf, pts, _ = files
    code, out, _ = call("classify", "--system", str(sysf), "--points", str(pts))
    assert code == 0
    rep = json.loads(out)
    assert [r["type"] for r in rep["reports"]] == ["I", "I"]


def test_malformed_system_exit_2(files):
    _, _, bad = files
    code, out, err = call("classify", "--system", str(bad))
    assert code == 2 and "position" in err and out == ""


def test_missing_file_and_bad_json():
    assert call("classify", "--system", "/nonexistent.json")[0] == 2
    assert call("classify", "--points", "[1, 2]")[0] == 2
    assert call("classify", "--system", "{not json")[0] == 2


def test_unknown_subcommand_is_usage_error():
    assert call("frobnicate")[0] == 2


def test_degenerate_point_exit_1():
    code, out, err = call("classify", "--system", "type4", "--points",
                          '{"x":0,"y":0,"z":0,"p":0,"q":0,"t":0}')
    assert code == 1 and "degenerate" in err
    assert json.loads(out)["reports"][0]["type"] == "Degenerate"


def test_wrong_type_exit_1():
    assert call("symbol", "--system", "type3")[0] == 1
    assert call("symbol", "--chart", "sigma1", "--point", '{"x":0,"y":0,"z":0,"p":0,"q":0,"t":1,"b":1}')[0] == 1


def test_cartan_solve_verify():
    code, out, _ = call("cartan", "solve", "--method", "i", "--y0", "t^2", "--verify")
    assert code == 0
    rep = json.loads(out)
    assert rep["checks"]["pullbacks_zero"] and rep["checks"]["through_origin"]
    assert rep["checks"]["nonimmersion_locus"] == "-2*t + x"
    assert rep["components"]["b"] == "2*t - x"


def test_cartan_solve_ii_and_compare():
    code, out, _ = call("cartan", "solve", "--method", "ii", "--phi", "tau^3", "--verify")
    assert code == 0 and json.loads(out)["checks"]["pullbacks_zero"]
    code, out, _ = call("cartan", "compare", "--y0", "t^4 + t^2")
    assert code == 0 and json.loads(out)["equal"] is True
    assert call("cartan", "solve", "--y0", "1/t")[0] == 2


def test_reports_are_deterministic(files):
    sysf, pts, _ = files
    a = call("classify", "--system", str(sysf), "--points", str(pts), "--verify")
    b = call("classify", "--system", str(sysf), "--points", str(pts), "--verify", "--jobs", "4")
    assert a == b and a[0] == 0


@pytest.mark.parametrize("argv", [
    ("fiber", "--verify"),
    ("prolong", "--verify"),
    ("symbol", "--verify"),
    ("symbol", "--chart", "sigma1", "--verify"),
    ("cauchy", "--verify"),
    ("growth", "--system", "db", "--points", '{"x1":0,"x2":0,"x3":0,"x4":0,"x5":0}', "--verify"),
])
def test_verify_mode_all_true(argv):
    code, out, _ = call(*argv)
    assert code == 0
    checks = json.loads(out)["verify"]

    def flat(v):
        if isinstance(v, dict):
            return all(flat(x) for x in v.values())
        if isinstance(v, list):
            return all(flat(x) for x in v)
        return v is True

    assert flat(checks)


def test_prolong_depth_cap(monkeypatch):
    assert call("prolong", "--depth", "4")[0] == 2
    monkeypatch.setenv("EDS_MAX_DEPTH", "1")
    assert call("prolong", "--depth", "2")[0] == 2
    monkeypatch.setenv("EDS_MAX_DEPTH", "2")
    code, out, _ = call("prolong", "--depth", "2")
    assert code == 0
    assert [lv["level"] for lv in json.loads(out)["tower"]] == [1, 2]


def test_growth_degenerate_point():
    code, _, err = call("growth", "--points", '{"x":0,"y":0,"z":0,"p":0,"q":0,"t":0}')
    assert code == 1 and "t^2" in err


def test_text_format():
    code, out, _ = call("cartan", "compare", "--y0", "t^2", "--format", "text")
    assert code == 0 and "equal: true" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "eds.cli", "cartan", "compare", "--y0", "t^3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["equal"] is True
