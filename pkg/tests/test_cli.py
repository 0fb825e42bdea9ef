import json
import subprocess
import sys

import numpy as np
import pytest

from flowembed.cli import jsonable, main
from flowembed.generators import random_marker


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_params_validate_exit_codes(capsys):
    code, out, _ = run(["params", "--validate"], capsys)
    rep = json.loads(out)
    assert code == 1 and not rep["passed"]
    assert rep["params"]["E"] == 460.0 and rep["schema_version"] == 1
    code, out, _ = run(["params", "--M", "25600", "--M1", "25601", "--validate"], capsys)
    assert code == 0 and json.loads(out)["passed"]


def test_tile_periodic_golden(golden, tmp_path, capsys):
    out = tmp_path / "t.json"
    code, _, _ = run(["tile", "--marker", str(golden / "periodic_marker.json"), "--report", "--out", str(out)],
                     capsys)
    rep = json.loads(out.read_text())
    assert code == 0 and rep["passed"]
    assert rep["tiling"] == json.loads((golden / "periodic_tiling.json").read_text())


def test_tile_random_marker_reports_short_cells(tmp_path, capsys):
    code, out, _ = run(["tile", "--random", "7016", "--report"], capsys)
    assert code == 1
    assert json.loads(out)["report"]["checks"] == {"length_ok": False, "value_gt_half": True,
                                                   "within_ball": True}


def test_missing_input_is_config_error(tmp_path, capsys):
    code, out, err = run(["tile", "--marker", str(tmp_path / "missing.json")], capsys)
    assert code == 2 and out == ""
    payload = json.loads(err.strip().splitlines()[0])
    assert payload["error"] == "FileNotFoundError" and payload["exit_code"] == 2


def test_validation_error_carries_offending_indices(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"lo": 0, "hi": 300, "M": 10, "M1": 25, "indices": [0, 3, 40], "values": [1, 1, 1]}))
    code, _, err = run(["tile", "--marker", str(bad)], capsys)
    payload = json.loads(err.strip().splitlines()[0])
    assert code == 2 and payload["error"] == "ValidationError" and 3 in payload["offending"]


def test_phi_commands(tmp_path, capsys):
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    m1.write_text(json.dumps(random_marker(700, (-2000, 2000)).to_json()))
    m2.write_text(json.dumps(random_marker(711, (-2000, 2000)).to_json()))
    code, out, _ = run(["phi", "eval", "--marker", str(m1), "--nx", "21", "--ny", "5"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["checks"] == {"equivariance": True, "sup_le_K1": True}
    assert len(rep["values"]) == 5 and len(rep["values"][0]) == 21
    code, out, _ = run(["phi", "zeros", "--marker", str(m1), "--re-range", "-20", "20"], capsys)
    assert code == 0 and json.loads(out)["passed"]
    code, _, err = run(["phi", "rigidity", "--marker", str(m1)], capsys)
    assert code == 2 and "marker2" in err


def test_flow_commands(tmp_path, capsys):
    code, out, _ = run(["flow", "return", "--system", "solenoid:4", "--orbit"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["return_time"] == 2.0 and rep["orbit_length"] == 12
    csv_path = tmp_path / "traj.csv"
    code, out, _ = run(["flow", "simulate", "--system", "product:4:5", "--t-max", "5", "--dt", "0.5",
                        "--csv", str(csv_path)], capsys)
    lines = csv_path.read_text().splitlines()
    assert code == 0 and lines[0] == "t,c0,c1,c2,c3,c4" and len(lines) == 12
    code, out, _ = run(["flow", "boundary", "--system", "torus", "--clipped", "--gamma", "0.2", "--eps", "0.05"],
                       capsys)
    assert code == 1 and not json.loads(out)["passed"]
    code, _, _ = run(["flow", "conjugacy", "--system", "torus", "--clipped"], capsys)
    assert code == 2
    code, _, _ = run(["flow", "return", "--system", "warp:9"], capsys)
    assert code == 2


def test_verify_all_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify-all", "--suites", "6,8", "--out", str(a)]) == 0
    assert main(["verify-all", "--suites", "6,8", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert [s["criterion"] for s in json.loads(a.read_text())["suites"]] == [6, 8]
    _, err = capsys.readouterr()
    assert "suite 6" in err  # timings on stderr only
    assert main(["verify-all", "--suites", "9"]) == 2


def test_jsonable():
    from fractions import Fraction

    out = jsonable({"a": np.float64(np.inf), "b": 1 + 2j, "c": Fraction(1, 3), "d": np.arange(2), 3: np.bool_(1)})
    assert out == {"a": "inf", "b": [1.0, 2.0], "c": "1/3", "d": [0, 1], "3": True}


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "flowembed.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify-all" in res.stdout


@pytest.mark.parametrize("argv", [["phi", "perturb"], ["tile"]])
def test_incomplete_arguments(argv, capsys):
    assert run(argv, capsys)[0] == 2
