import json
import subprocess
import sys

import pytest

from splitslag import cli

from conftest import FIXTURES

GOLDEN = FIXTURES.parent / "golden"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def payload(out):
    return json.loads(out)


def test_plane_standard(capsys):
    code, out, _ = run(capsys, "plane", "--in", FIXTURES / "standard_plane.json")
    assert code == 0 and payload(out)["slag"] is True


def test_plane_tilted_fails_predicate(capsys):
    code, out, _ = run(capsys, "plane", "--in", FIXTURES / "tilted_plane.json")
    assert code == 1 and payload(out)["lagrangian"] is False


def test_schema_error_is_path_precise(capsys):
    code, _, err = run(capsys, "plane", "--in", FIXTURES / "schema_bad_plane.json")
    assert code == 2
    assert "/columns/1/1" in err


def test_missing_file_and_usage(capsys, tmp_path):
    code, _, err = run(capsys, "plane", "--in", tmp_path / "nope.json")
    assert code == 2 and "nope.json" in err
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "plane")[0] == 2


def test_bad_potential_witness(capsys):
    code, out, _ = run(capsys, "residual", "--picture", "null", "--potential",
                       FIXTURES / "bad_null_potential.json")
    rep = payload(out)
    assert code == 1
    assert rep["witness"]["point"] is not None and rep["max"] > 0.1


def test_radial_residual(capsys):
    code, out, _ = run(capsys, "residual", "--picture", "null", "--potential", FIXTURES / "radial_g.json")
    assert code == 0 and payload(out)["max"] <= 1e-10


def test_global_options_either_side(capsys):
    a = run(capsys, "--format", "csv", "graph-test", "--in", FIXTURES / "graph_x_slag.json")
    b = run(capsys, "graph-test", "--in", FIXTURES / "graph_x_slag.json", "--format", "csv")
    assert a == b and a[0] == 0


def test_csv_header(capsys):
    code, out, _ = run(capsys, "holo2d", "curve", "--spec", FIXTURES / "curve_quarter.json",
                       "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and "," in lines[0] and len(lines) > 100


def test_out_file(capsys, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "holo2d", "identity", "--out", target)
    assert code == 0 and out == ""
    assert payload(target.read_text())["identity_residual"] == 0.0


def test_mealy_determinism_and_threads(capsys):
    a = run(capsys, "sample-mealy", "--n", 3, "--count", 2000, "--seed", 7)
    b = run(capsys, "sample-mealy", "--n", 3, "--count", 2000, "--seed", 7, "--threads", 4)
    assert a == b and a[0] == 0
    assert payload(a[1])["min_re_dz"] >= 1 - 1e-9


def test_tolerance_env(capsys, monkeypatch):
    monkeypatch.setenv("SLAG_TOL", "junk")
    assert run(capsys, "holo2d", "identity")[0] == 2


@pytest.mark.parametrize("argv,code", [
    (["volume-exp", "--g", "annulus_g.json", "--eta", "annulus_bump.json", "--eps", "0.1",
      "--nodes", "51", "--annulus", "0.5", "1.5"], 0),
    (["transport", "1d", "--rho", "normal_density.json", "--rho-tilde", "normal_shifted.json"], 0),
    (["transport", "1d", "--rho", "normal_density.json", "--rho-tilde", "normal_shifted.json",
      "--format", "csv"], None),
    (["transport", "1d", "--rho", "uniform01.json", "--rho-tilde", "uniform02.json", "--res-tol", "1e-10"], 0),
    (["transport", "kmw", "--potential", "radial_g.json"], 0),
    (["deform", "--g", "radial_g.json", "--gdot", "gdot_linear.json", "--grid", "26"], 0),
    (["deform", "--g", "radial_g.json", "--gdot", "gdot_quadratic.json", "--grid", "26"], 1),
    (["phase-grad", "--h", "0.1"], 0),
    (["forms-check", "--model", "2"], 0),
    (["forms-check", "--model", "2", "--perturb", "0.01"], 1),
    (["appc", "--u", "appc_u.json", "--h", "appc_h.json", "--expect-zero"], 0),
    (["holo2d", "plane", "--lattice", "8"], 0),
    (["canonical", "--in", "tilted_plane.json"], 0),
    (["cayley", "--in", "graph_x_slag.json"], 0),
])
def test_subcommands(capsys, monkeypatch, argv, code):
    monkeypatch.chdir(FIXTURES)
    got, out, err = run(capsys, *argv)
    if code is None:  # csv output
        assert got == 0 and out.splitlines()[0] == "u,T,g,residual"
        return
    assert got == code, err
    assert "passed" in payload(out)


@pytest.mark.parametrize("name,argv", [
    ("plane_standard.json", ["plane", "--in", "standard_plane.json"]),
    ("graph_x_slag.json", ["graph-test", "--in", "graph_x_slag.json"]),
    ("mealy_n2_500_seed11.json", ["sample-mealy", "--n", "2", "--count", "500", "--seed", "11"]),
    ("transport_discrete.json", ["transport", "discrete", "--mu", "mu.json", "--nu", "nu.json"]),
    ("holo2d_identity.json", ["holo2d", "identity"]),
])
def test_golden_reports(capsys, monkeypatch, name, argv):
    monkeypatch.chdir(FIXTURES)
    _, out, _ = run(capsys, *argv)
    expected = json.loads((GOLDEN / name).read_text())
    assert _close(payload(out), expected)


def _close(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(_close(x, y) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return a == pytest.approx(b, abs=1e-12, rel=1e-12)
    return a == b


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "splitslag.cli", "holo2d", "identity"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["passed"] is True
