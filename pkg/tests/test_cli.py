import json
import math

import jsonschema
import numpy as np
import pytest

import oracles
from xpmodels.cli import SUBCOMMANDS, load_schema, run
from xpmodels.io import read_csv, save_model
from xpmodels.models import make_model

H = "h=6.283185307179586"
TWO_PI = 2 * math.pi


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(capsys, *argv):
    code, out, err = call(capsys, *argv)
    assert code == 0, err
    return read_csv(out)


# --- one check per subcommand -----------------------------------------------------------

def test_catalog(capsys):
    code, out, _ = call(capsys, "catalog")
    assert code == 0 and out.splitlines()[0] == "kind,parameter_sets"
    assert "model-III,lx,lp" in out


def test_curvature_berry_keating(capsys):
    _, header, arr = table(capsys, "curvature", "--model", "berry-keating", "--param", "h=1", "--at", "1")
    assert header == ["x", "R", "degraded"]
    assert arr[0, 1] == pytest.approx(-2.0, abs=1e-12)


def test_curvature_grid(capsys):
    _, _, arr = table(capsys, "curvature", "--model", "power", "--param", "A=1", "--param", "exponent=2",
                      "--param", "h=1", "--grid", "2", "5", "--points", "4")
    assert np.allclose(arr[:, 1] * arr[:, 0] ** 2, -4.0, atol=1e-10)


def test_trajectory(capsys):
    meta, header, arr = table(capsys, "trajectory", "--model", "linear", "--param", "h=1",
                              "--energy", "5", "--samples", "200")
    assert header[:3] == ["t", "x", "p"]
    E = arr[:, 1] * (arr[:, 2] + 1 / arr[:, 2])
    assert np.max(np.abs(E - 5)) <= 1e-8 * 5
    assert float(meta["period"]) == pytest.approx(math.acosh(2.5), rel=1e-10)


def test_trajectory_plot_data_blocks(capsys):
    code, out, _ = call(capsys, "trajectory", "--model", "linear", "--param", "h=1", "--energy", "5",
                        "--plot-data")
    assert code == 0
    assert "# block: wall" in out and "# block: light-cone hyperbola" in out
    assert "," not in out.split("\n\n")[0].splitlines()[-1]


def test_period(capsys):
    _, header, arr = table(capsys, "period", "--model", "linear", "--param", H, "--energy",
                           repr(8 * math.pi))
    assert header == ["E", "T", "T_closed"]
    assert arr[0, 1] == pytest.approx(math.acosh(2), rel=1e-12)


def test_count_with_closed_form(capsys):
    _, header, arr = table(capsys, "count", "--model", "linear", "--param", H, "--energy", "40",
                           "--energy", "60", "--closed")
    assert header == ["E", "n", "dn_dE", "n_closed"]
    ref = [oracles.linear_count(e, TWO_PI) for e in (40.0, 60.0)]
    assert np.allclose(arr[:, 1], ref, atol=1e-9)
    assert np.allclose(arr[:, 3], ref, atol=1e-9)


def test_count_range(capsys):
    _, _, arr = table(capsys, "count", "--model", "berry-keating", "--param", "h=1",
                      "--erange", "5", "50", "--points", "10")
    assert arr.shape[0] == 10 and np.all(np.diff(arr[:, 1]) > 0)


def test_invert_linear_log(capsys):
    _, header, arr = table(capsys, "invert", "--family", "xp", "--profile", "linear-log",
                           "--param", f"w0={TWO_PI!r}", "--param", "mu=0.3", "--max", "60",
                           "--points", "6")
    assert header[:2] == ["w", "x"]
    assert "x_closed" in header
    col = header.index("x_closed")
    assert np.max(np.abs(arr[:, 1] - arr[:, col])) <= 1e-6


def test_invert_standard(capsys):
    meta, header, arr = table(capsys, "invert", "--family", "standard", "--profile", "wu-sprung",
                              "--max", "1000", "--per-decade", "5")
    assert header[:2] == ["V", "x"]
    # (sqrt(V)/pi) log(2V / pi e^2) dips below zero before it grows
    assert meta["monotone"] == "0"
    from xpmodels.semiclassics import wu_sprung_profile
    assert np.allclose(arr[:, 1], wu_sprung_profile(arr[:, 0]), rtol=1e-10, atol=1e-12)


def test_spectrum_default_bessel(capsys):
    meta, header, arr = table(capsys, "spectrum", "--model", "linear", "--param", H, "--theta", "0",
                              "--emax", "30", "--format", "csv")
    assert header == ["index", "E", "residual"] and meta["solver"] == "bessel"
    pos = arr[arr[:, 1] > 0, 1]
    assert np.allclose(pos, oracles.modelI_roots_fine(TWO_PI, 1e-6, 30.0, step=0.05), atol=1e-9)
    assert np.max(np.abs(arr[:, 1] + arr[::-1, 1])) <= 1e-9


def test_spectrum_model_III_routes(capsys):
    _, _, a = table(capsys, "spectrum", "--model", "model-III", "--param", "lx=3.141592653589793",
                    "--param", "lp=2", "--emax", "25")
    _, _, b = table(capsys, "spectrum", "--model", "model-III", "--param", "lx=3.141592653589793",
                    "--param", "lp=2", "--emax", "25", "--solver", "shoot")
    assert np.max(np.abs(a[:, 1] - b[:, 1])) <= 1e-6


def test_spectrum_constant_closed(capsys):
    meta, _, arr = table(capsys, "spectrum", "--model", "constant", "--param", "c=1.5",
                         "--theta", "0.5")
    assert arr[0, 1] == pytest.approx(3.0 * math.sin(0.5), abs=1e-12)
    assert meta["continuum"] == "-3.0 3.0"


def test_scatter(capsys):
    meta, header, arr = table(capsys, "scatter", "--model", "constant", "--param", "c=1",
                              "--energy", "3", "--energy", "-4.5", "--theta", "0.2")
    assert "norm" in header
    col = header.index("norm")
    assert np.allclose(arr[:, col], 1 / TWO_PI, atol=1e-12)


def test_zero_mode(capsys):
    _, header, arr = table(capsys, "zero-mode", "--model", "linear", "--param", H, "--theta",
                           repr(math.pi))
    assert header == ["present", "norm", "divergent"]
    assert arr[0, 0] == 1 and arr[0, 1] == pytest.approx(oracles.e1(4 * math.pi), rel=1e-10)
    _, _, arr = table(capsys, "zero-mode", "--model", "linear", "--param", H)
    assert arr[0, 0] == 0


def test_compare_with_zeros(capsys, tmp_path):
    z = tmp_path / "zeros.txt"
    z.write_text("14.134725141734693\n21.022039638771555\n25.010857580145688\n")
    meta, header, arr = table(capsys, "compare", "--model", "linear", "--param", H, "--emax", "80",
                              "--zeros", str(z), "--window", "60", "80")
    assert header[-1] == "nearest_zero_distance"
    assert float(meta["target_offset"]) == 1.375
    off = arr[(arr[:, 1] >= 60) & (arr[:, 1] <= 80), header.index("offset")]
    assert np.all(np.abs(off - 1.375) < 0.1)


# --- formats, determinism, config -------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["catalog"],
    ["curvature", "--model", "cosh", "--param", "w0=1", "--param", "mu=0.5", "--at", "0.5"],
    ["count", "--model", "linear", "--param", "h=1", "--energy", "5"],
    ["spectrum", "--model", "constant", "--param", "c=1", "--theta", "2.5"],
    ["zero-mode", "--model", "cosh", "--param", "w0=1", "--param", "mu=0.5", "--theta", "3.141592653589793"],
])
def test_json_validates(capsys, argv):
    code, out, _ = call(capsys, *argv, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema())
    assert doc["command"] == argv[0]


def test_schema_lists_every_subcommand():
    assert set(load_schema()["properties"]["command"]["enum"]) == set(SUBCOMMANDS)


def test_output_file_is_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(["spectrum", "--model", "berry-keating", "--param", "h=1", "--emax", "15",
                    "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert capsys.readouterr().out == ""


def test_model_file(tmp_path, capsys):
    p = tmp_path / "m.json"
    save_model(make_model("linear", {"alpha": 1.0, "h": 1.0}), p)
    _, _, a = table(capsys, "count", "--model-file", str(p), "--energy", "5")
    _, _, b = table(capsys, "count", "--model", "linear", "--param", "h=1", "--energy", "5")
    assert np.array_equal(a, b)


def test_config_defaults_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "linear", "param": {"h": 1.0}, "energy": [5, 7]}))
    _, _, arr = table(capsys, "count", "--config", str(cfg))
    assert arr[:, 0].tolist() == [5.0, 7.0]
    _, _, arr = table(capsys, "count", "--config", str(cfg), "--energy", "9", "--param", "h=2")
    assert arr[:, 0].tolist() == [9.0]
    _, _, ref = table(capsys, "count", "--model", "linear", "--param", "h=2", "--energy", "9")
    assert np.array_equal(arr, ref)


# --- exit codes --------------------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["spectrum", "--model", "linear", "--param", "h=1", "--emax", "-1"],
    ["count", "--model", "linear", "--param", "q=1", "--energy", "5"],
    ["count", "--model", "spiral", "--energy", "5"],
    ["spectrum", "--model", "berry-keating", "--param", "h=1", "--theta", "1"],
    ["spectrum", "--model", "berry-keating", "--param", "h=1", "--solver", "bessel"],
    ["count", "--model", "linear", "--param", "h=1", "--energy", "5", "--plot-data", "--format", "json"],
    ["curvature", "--model", "linear", "--param", "h=1", "--at", "0.5"],
    ["trajectory", "--model", "linear", "--param", "h=1", "--energy", "5", "--samples", "10"],
    ["count", "--model", "linear", "--param", "h=1", "--energy", "5", "--tol", "2"],
    ["scatter", "--model", "constant", "--param", "c=1", "--energy", "1"],
    ["count", "--model", "linear", "--param", "h=1"],
    ["count", "--config", "/nonexistent/cfg.json", "--model", "linear", "--energy", "5"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 2
    assert out == "" and err


def test_bad_model_file_exit_2(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"kind": "linear", "params": {"h": "x"}}))
    assert call(capsys, "count", "--model-file", str(p), "--energy", "5")[0] == 2


@pytest.mark.parametrize("argv", [
    ["count", "--model", "linear", "--param", "h=6.283185307179586", "--energy", "5"],
    ["period", "--model", "constant", "--param", "c=1", "--energy", "5"],
    ["invert", "--family", "xp", "--profile", "linear-log", "--param", "w0=1", "--param", "mu=0.5",
     "--max", "5", "--points", "5", "--recover-gamma"],
])
def test_numeric_failures_exit_1(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 1 and out == "" and err


def test_help_and_version(capsys):
    assert run(["--version"]) == 0
    assert "xp" in capsys.readouterr().out
    assert run(["spectrum", "--help"]) == 0
