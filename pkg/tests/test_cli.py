import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from gsbvp import cli
from gsbvp.bhalf import bhalf_closed
from gsbvp.boundary import pure_skew_2d
from gsbvp.errors import ConvergenceFailure, NotElliptic, ShapeMismatch

FIXTURES = Path(__file__).parent / "fixtures"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def test_check_pauli():
    code, out, err = call("check", FIXTURES / "pauli.json")
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["ellipticity"]["classification"] == "StronglyElliptic"
    assert doc["natural_spectrum"]["branches"][0]["mult"] == 1


def test_bhalf_pauli_value():
    code, out, _ = call("bhalf", FIXTURES / "pauli.json")
    assert code == 0
    doc = json.loads(out)
    assert doc["trace"] == pytest.approx(2.954089751509192, abs=1e-12)


@pytest.mark.parametrize("method", ["quad", "tensor", "series", "closed"])
def test_bhalf_method_flag(method):
    code, out, _ = call("bhalf", FIXTURES / "skew_a05.json", "--method", method)
    assert code == 0
    # one Dirichlet component shifts the pure-skew value by -sqrt(pi)/2
    expected = bhalf_closed(pure_skew_2d(0.5, 1)).trace
    assert expected == pytest.approx(2.3208530 - 0.8862269, abs=1e-6)
    assert json.loads(out)["trace"] == pytest.approx(expected, abs=2e-2 if method == "series" else 1e-6)


def test_not_elliptic_exit_code():
    code, out, err = call("bhalf", FIXTURES / "skew_a15.json")
    assert code == 3 and out == ""
    e = json.loads(err)["error"]
    assert e["type"] == "NotElliptic"
    assert e["margin"] == pytest.approx(-0.5)


def test_validation_exit_codes(tmp_path):
    assert call("check", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "kind": "boundary", "payload": {"m": 3}}))
    code, _, err = call("check", bad)
    assert code == 2
    assert json.loads(err)["error"]["type"] == "SchemaError"
    assert call("frobnicate")[0] == 2
    assert call("profile", FIXTURES / "pauli.json", "--z", "0:1")[0] == 2
    assert call("gauge", "graviton", "--m", "3", "--lambda", "0.2")[0] == 2


def test_invalid_setup_lists_violations(tmp_path):
    f = tmp_path / "v.json"
    f.write_text(json.dumps({
        "schema_version": 1, "kind": "boundary",
        "payload": {"m": 2, "dim_v": 1, "pi": [[0.5]], "gamma": [[[0]]]},
    }))
    code, out, _ = call("check", f)
    assert code == 0
    assert [v["name"] for v in json.loads(out)["violations"]] == ["pi not idempotent"]
    code, _, err = call("bhalf", f)
    assert code == 2
    assert json.loads(err)["error"]["violations"][0]["name"] == "pi not idempotent"


def test_exit_code_mapping(monkeypatch):
    assert cli.exit_code_for(NotElliptic("x", -1.0)) == 3
    assert cli.exit_code_for(ShapeMismatch("x")) == 2
    assert cli.exit_code_for(ConvergenceFailure("x")) == 4

    def boom(args):
        raise ConvergenceFailure("did not converge")

    monkeypatch.setattr(cli, "cmd_check", boom)
    code, _, err = call("check", FIXTURES / "pauli.json")
    assert code == 4
    assert json.loads(err)["error"]["type"] == "ConvergenceFailure"


def test_profile_csv():
    code, out, _ = call("profile", FIXTURES / "pauli.json", "--z", "0:1:3", "--with-j")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    header = rows[0]
    assert header[0] == "z" and header[-1] == "j"
    assert "psi_re_0_1" in header and "phi_im_1_1" in header
    assert len(rows) == 4
    first = dict(zip(header, map(float, rows[1])))
    assert first["psi_re_0_0"] == pytest.approx(1.1816359006, abs=1e-9)
    assert first["j"] == pytest.approx(first["phi_re_0_0"] + first["phi_re_1_1"])


def test_diag_csv():
    code, out, _ = call("diag", FIXTURES / "dirichlet.json", "--t", "1", "--r", "0:1:2")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["r", "bracket_re_0_0", "bracket_im_0_0"]
    assert float(rows[2][1]) == pytest.approx(1 - 0.36787944117144233)


def test_mesh_bhalf():
    code, out, _ = call("bhalf", FIXTURES / "mesh_mixed.json")
    assert code == 0
    doc = json.loads(out)
    assert doc["a_half"] == pytest.approx(0.0, abs=1e-14)
    assert doc["total_area"] == 3.0


def test_gauge_models():
    code, out, _ = call("gauge", "graviton", "--m", "4")
    assert code == 0
    doc = json.loads(out)
    assert (doc["dim_v"], doc["dim_g"]) == (10, 4)
    code, out, _ = call("gauge", FIXTURES / "gauge_abelian.json")
    assert code == 0


def test_oracle_subcommand():
    code, out, _ = call("oracle", FIXTURES / "dirichlet.json", "--t-sweep", "0.01,0.03,0.1", "--grid", "1000")
    assert code == 0
    assert json.loads(out)["estimate"] == pytest.approx(-0.886226925, rel=1e-3)


def test_report_round_trip_is_deterministic(tmp_path):
    code, first, _ = call("report", FIXTURES / "skew_a05.json")
    assert code == 0
    again = tmp_path / "report.json"
    again.write_text(first)
    code, second, _ = call("report", again)
    assert code == 0
    assert json.loads(second)["bhalf"] == json.loads(first)["bhalf"]
    assert call("report", FIXTURES / "skew_a05.json")[1] == first


def test_report_records_section_errors():
    code, out, _ = call("report", FIXTURES / "skew_a15.json")
    assert code == 0
    doc = json.loads(out)
    assert doc["ellipticity"]["classification"] == "Violated"
    assert doc["bhalf"]["error"]["type"] == "NotElliptic"


def test_console_script_version():
    res = subprocess.run([sys.executable, "-m", "gsbvp.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("gsbvp ")
