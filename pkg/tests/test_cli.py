import json
import math
import subprocess
import sys

import numpy as np
import pytest

from jacobi_gap import cli


def _read_csv(path):
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {k: rows[:, i] for i, k in enumerate(["theta", "phi", "t", "E", "nu"])}


def test_series_uniform(tmp_path):
    out = tmp_path / "s.csv"
    code = cli.main(["--method", "series", "--a", "-1/2", "--b", "-1/2", "--N", "1", "--degree", "50", "--output", str(out)])
    assert code == 0
    g = _read_csv(out)
    assert np.all(g["t"] <= 0.9 + 1e-12)
    assert np.max(np.abs(g["nu"] - 1 / math.pi)) < 1e-4
    assert g["phi"][-1] < math.pi


def test_compare_writes_report(tmp_path):
    out = tmp_path / "n2.csv"
    code = cli.main(["--method", "compare", "--a", "0", "--b", "0", "--N", "2", "--output", str(out)])
    assert code == 0
    rep = json.loads((tmp_path / "n2.report.json").read_text())
    assert rep["verdict"] == "agree"
    assert rep["overlap_theta"] == [0.5, 1.5]


def test_compare_positive_a_exit_code(tmp_path):
    out = tmp_path / "c.csv"
    with pytest.warns(Warning):
        code = cli.main(["--method", "compare", "--a", "1/2", "--b", "-1/2", "--N", "2", "--output", str(out)])
    assert code == 4
    rep = json.loads((tmp_path / "c.report.json").read_text())
    assert rep["rk_status"] == "warned"


def test_rk_failure_exit_code(tmp_path, capsys):
    # this parameter set hits a negative radicand at default tolerances
    args = ["--a", "-1/2", "--b", "0", "--N", "3", "--output", str(tmp_path / "r.csv")]
    assert cli.main(["--method", "rk"] + args) == 3
    assert "solver failure at t=" in capsys.readouterr().err
    assert cli.main(["--method", "compare", "--degree", "60"] + args) == 3
    assert json.loads((tmp_path / "r.report.json").read_text())["verdict"] == "rk-failed"


def test_rk_grid_points(tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["--method", "rk", "--a", "0", "--b", "0", "--N", "2", "--grid-points", "50", "--output", str(out)]) == 0
    g = _read_csv(out)
    assert len(g["phi"]) == 50
    # a = b = 0, N = 2: E~ = t^4
    assert np.allclose(g["E"], g["t"] ** 4, atol=1e-5)


def test_mc_byte_identical(tmp_path):
    args = ["--method", "mc", "--a", "-1/2", "--b", "-1/2", "--N", "2", "--samples", "5000", "--seed", "4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(args + ["--output", str(a)]) == 0
    assert cli.main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_glue_report(tmp_path):
    out = tmp_path / "g.csv"
    assert cli.main(["--method", "glue", "--a", "0", "--b", "0", "--N", "2", "--degree", "100", "--output", str(out)]) == 0
    rep = json.loads((tmp_path / "g.report.json").read_text())
    assert rep["pieces"] == ["asymptotic", "rk", "series"]
    g = _read_csv(out)
    assert g["phi"][0] == 0.0 and g["phi"][-1] == pytest.approx(math.pi)


@pytest.mark.parametrize(
    "args",
    [
        ["--method", "series", "--a", "-1", "--b", "0", "--N", "1"],
        ["--method", "bogus", "--a", "0", "--b", "0", "--N", "1"],
        ["--method", "series", "--a", "0", "--b", "0"],
        ["--method", "series", "--a", "x", "--b", "0", "--N", "1"],
        ["--method", "mc", "--a", "-3/4", "--b", "0", "--N", "2"],
    ],
)
def test_usage_errors(args, capsys):
    assert cli.main(args) == 2
    assert "usage" in capsys.readouterr().err


def test_stdout_output(capsys):
    assert cli.main(["--method", "series", "--a", "-1/2", "--b", "-1/2", "--N", "1", "--degree", "20", "--grid-points", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "theta,phi,t,E,nu"
    assert len(lines) == 6


def test_negative_value_binding():
    assert cli._join_negative_values(["--a", "-1/2", "--N", "2"]) == ["--a=-1/2", "--N", "2"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "jacobi_gap", "--method", "series", "--a", "0", "--b", "0", "--N", "1", "--degree", "10", "--grid-points", "3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("theta,phi,t,E,nu")
