import json
import subprocess
import sys

import numpy as np
import pytest

from moebius.cli import main, parse_args


def test_parse_defaults():
    cfg = parse_args(["spectrum-free", "--max-n", "2"])
    assert cfg.command == "spectrum-free" and cfg.format == "json"
    assert cfg["max_n"] == 2 and cfg["grid"] is None
    assert cfg.output_path.name == "spectrum_free.json"
    assert parse_args(["geometry"]).format == "csv"


@pytest.mark.parametrize("argv, flag", [
    (["spectrum-free", "--grid", "-4"], "--grid"),
    (["spectrum-free", "--grid", "17"], "--grid"),
    (["geometry", "--nu", "two"], "--nu"),
    (["geometry", "--radius", "1", "--half-width", "2"], "--half-width"),
    (["spectrum-flux", "--grid", "32", "--levels", "40"], "--levels"),
    (["classical", "--dtau", "nan"], "--dtau"),
    (["classical", "--frobnicate", "1"], "--frobnicate"),
])
def test_bad_arguments_exit_2(argv, flag, capsys):
    assert main(argv) == 2
    assert flag in capsys.readouterr().err


def test_no_command_exits_2():
    assert main([]) == 2


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert "spectrum-coulomb" in capsys.readouterr().out
    assert main(["classical", "--help"]) == 0


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# ring settings\nmax_n = 3\ngrid=64\neigenvectors = yes\n")
    cfg = parse_args(["spectrum-free", "--config", str(conf), "--max-n", "1"])
    assert cfg["max_n"] == 1 and cfg["grid"] == 64 and cfg["eigenvectors"]


def test_config_file_errors(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("bogus_key = 1\n")
    assert main(["geometry", "--config", str(conf)]) == 2
    assert "--bogus-key" in capsys.readouterr().err
    conf.write_text("nu\n")
    assert main(["geometry", "--config", str(conf)]) == 2
    assert main(["geometry", "--config", str(tmp_path / "missing.conf")]) == 2


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("MOEBIUS_OUT_DIR", str(tmp_path / "env"))
    assert parse_args(["geometry"]).out_dir == tmp_path / "env"
    assert parse_args(["geometry", "--out-dir", str(tmp_path)]).out_dir == tmp_path


def test_geometry_run(tmp_path):
    assert main(["geometry", "--nu", "4", "--nv", "3", "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "mesh.csv").read_text().splitlines()
    assert lines[0] == "u,v,x,y,z,nx,ny,nz" and len(lines) == 13
    assert main(["geometry", "--nu", "4", "--nv", "3", "--format", "json",
                 "--out-dir", str(tmp_path)]) == 0
    assert len(json.loads((tmp_path / "mesh.json").read_text())) == 12


def test_spectrum_free_run(tmp_path):
    assert main(["spectrum-free", "--max-n", "2", "--grid", "256", "--eigenvectors",
                 "--out-dir", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "spectrum_free.json").read_text())
    assert data["eigenvalues"] == [0.0, 0.125, 0.125, 0.5, 0.5]
    np.testing.assert_allclose(data["numerical"]["eigenvalues"], data["eigenvalues"], atol=1e-3)
    assert (tmp_path / "spectrum_free_eigenvectors.csv").exists()


def test_spectrum_flux_run(tmp_path, capsys):
    assert main(["spectrum-flux", "--flux-min", "0", "--flux-max", "0.5", "--flux-steps", "3",
                 "--grid", "64", "--levels", "4", "--out-dir", str(tmp_path)]) == 0
    assert capsys.readouterr().err.count(": done") == 3
    data = json.loads((tmp_path / "flux_sweep.json").read_text())
    sweep = data["sweep"]
    assert [p["params"]["flux_A"] for p in sweep] == [0.0, 0.25, 0.5]
    np.testing.assert_allclose(sweep[0]["eigenvalues"], sweep[2]["eigenvalues"], atol=1e-9)
    assert len(sweep[1]["minimal_coupling"]) == 4 and len(sweep[1]["quarter_formula"]) == 4


def test_spectrum_coulomb_run(tmp_path):
    assert main(["spectrum-coulomb", "--k", "0", "--format", "csv", "--output", "c.csv",
                 "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0].startswith("k,n_r,solver") and len(lines) == 4


def test_classical_run_writes_residual_log(tmp_path):
    assert main(["classical", "--steps", "200", "--spin", "0.5", "--v-amplitude", "0.1",
                 "--out-dir", str(tmp_path)]) == 0
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("tau,theta,p_theta,e11")
    log = json.loads((tmp_path / "trajectory_residuals.json").read_text())
    assert log


def test_solver_failure_exits_1(tmp_path, capsys):
    assert main(["classical", "--dtau", "3.0", "--steps", "50", "--v-amplitude", "5",
                 "--out-dir", str(tmp_path)]) == 1
    assert "StepSizeError" in capsys.readouterr().err
    assert main(["geometry", "--nu", "5000", "--nv", "5000", "--out-dir", str(tmp_path)]) == 1


def test_outputs_are_byte_identical(tmp_path):
    args = ["spectrum-flux", "--flux", "0.3", "--grid", "64", "--levels", "3"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "flux_sweep.json").read_bytes()
    assert a == (tmp_path / "b" / "flux_sweep.json").read_bytes()
    assert b"\r" not in a


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "moebius", "spectrum-free", "--max-n", "1",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "spectrum_free.json").exists()
