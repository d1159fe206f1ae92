import json
import subprocess
import sys

import pytest

from liwave.cli import EXIT_CONFIG, EXIT_OK, main


def run_cli(*args):
    """In-process invocation; returns (exit_code, stdout) via capsys-free capture."""
    import contextlib
    import io
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(args))
    return code, buf.getvalue()


@pytest.fixture(scope="module")
def mini_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "mini_lj.json"
    path.write_text(json.dumps({
        "schema_version": 1,
        "pair": "mini",
        "variant": "lennard_jones",
        "params": {"epsilon": 2.5e-21, "r_m": 2.0e-10},
        "units": {"epsilon": "J", "r_m": "m"},
        "provenance": "test fixture",
    }))
    return str(path)


def test_potential_eval_csv(mini_config, tmp_path):
    out = tmp_path / "pot.csv"
    code, _ = run_cli("potential", "eval", "--config", mini_config,
                      "--r-min", "2e-10", "--r-max", "5e-10", "--points", "7",
                      "--out", str(out))
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "# schema_version,1"
    assert lines[1] == "r,V"
    assert len(lines) == 9


def test_potential_eval_angstrom_units(mini_config, tmp_path):
    out_si = tmp_path / "si.csv"
    out_ang = tmp_path / "ang.csv"
    run_cli("potential", "eval", "--config", mini_config,
            "--r-min", "2e-10", "--r-max", "5e-10", "--points", "5", "--out", str(out_si))
    run_cli("potential", "eval", "--config", mini_config, "--units", "mbar-angstrom",
            "--r-min", "2.0", "--r-max", "5.0", "--points", "5", "--out", str(out_ang))
    assert out_si.read_text() == out_ang.read_text()


def test_cell_json_and_mbar_flag(tmp_path):
    out = tmp_path / "cell.json"
    code, _ = run_cli("cell", "--geom", "cell_default.json", "--gas", "xenon",
                      "--pressure-mbar", "1e-4", "--out", str(out))
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["schema_version"] == 1
    assert payload["p_meas"] == pytest.approx(1e-2)
    assert 0.88 <= payload["pressure_correction"] <= 0.92
    assert payload["effective_length"] == pytest.approx(0.0665, abs=1e-3)
    # same pressure through --units mbar-angstrom
    code, text = run_cli("cell", "--geom", "cell_default.json", "--units", "mbar-angstrom",
                         "--pressure", "1e-4")
    assert code == EXIT_OK
    assert json.loads(text)["p_meas"] == pytest.approx(1e-2)


def test_missing_config_fails_before_compute(tmp_path):
    import io, contextlib
    err = io.StringIO()
    with contextlib.redirect_stderr(err):
        code, _ = run_cli("index", "--config", str(tmp_path / "nope.json"))
    assert code == EXIT_CONFIG
    assert "nope.json" in err.getvalue()


def test_phaseshifts_and_amplitude(mini_config, tmp_path):
    out = tmp_path / "ps.csv"
    code, _ = run_cli("phaseshifts", "--config", mini_config, "--gas", "argon",
                      "--velocity", "900", "--delta-tol", "1e-6", "--out", str(out))
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[1] == "l,delta,method"
    assert lines[2].startswith("0,")
    code, text = run_cli("amplitude", "--config", mini_config, "--gas", "argon",
                         "--velocity", "900", "--delta-tol", "1e-6")
    assert code == EXIT_OK
    header = text.splitlines()[1].split(",")
    assert header == ["k", "f_re", "f_im", "sigma"]


def test_index_json(mini_config, tmp_path):
    out = tmp_path / "index.json"
    code, _ = run_cli("index", "--config", mini_config, "--gas", "argon",
                      "--velocity", "900", "--nodes", "6", "--delta-tol", "1e-4",
                      "--out", str(out))
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["rho"] == pytest.approx(
        payload["re_per_density"] / payload["im_per_density"], rel=1e-12)
    assert payload["sigma_eff"] == pytest.approx(
        2.0 * payload["im_per_density"] * payload["k_lab"], rel=1e-12)


def test_simulate_analyze_deterministic(tmp_path):
    run_dir = tmp_path / "runs"
    args = ("simulate", "--index-from", "values",
            "--re-per-density", "1.82e-29", "--im-per-density", "2.40e-29",
            "--pressure-list", "0.006,0.012,0.018,0.024,0.030",
            "--out", str(run_dir), "--seed", "11")
    code, _ = run_cli(*args)
    assert code == EXIT_OK
    files = sorted(run_dir.glob("run_*.json"))
    assert len(files) == 5
    first = [f.read_bytes() for f in files]
    code, _ = run_cli(*args)
    assert code == EXIT_OK
    assert [f.read_bytes() for f in sorted(run_dir.glob("run_*.json"))] == first

    report = tmp_path / "report.json"
    code, _ = run_cli("analyze", "--runs", str(run_dir), "--beam-velocity", "1075",
                      "--out", str(report))
    assert code == EXIT_OK
    payload = json.loads(report.read_text())
    assert payload["re_per_density"] == pytest.approx(1.82e-29, abs=4 * payload["re_err"])
    assert payload["im_per_density"] == pytest.approx(2.40e-29, abs=4 * payload["im_err"])
    assert report.with_suffix(".series.csv").exists()
    # byte-identical rerun
    blob = report.read_bytes()
    run_cli("analyze", "--runs", str(run_dir), "--beam-velocity", "1075",
            "--out", str(report))
    assert report.read_bytes() == blob


def test_analyze_corrupted_run_file(tmp_path):
    import io, contextlib
    run_dir = tmp_path / "runs"
    run_dir.mkdir()
    bad = run_dir / "run_001.json"
    bad.write_text("{broken json")
    (run_dir / "run_002.json").write_text("{}")
    err = io.StringIO()
    with contextlib.redirect_stderr(err):
        code, _ = run_cli("analyze", "--runs", str(run_dir), "--beam-velocity", "1075")
    assert code == EXIT_CONFIG
    assert "run_001.json" in err.getvalue()


def test_fig_commands_emit_csv_and_png(mini_config, tmp_path):
    out = tmp_path / "fig5.csv"
    code, _ = run_cli("fig5", "--config", mini_config, "--gas", "argon",
                      "--u-min", "700", "--u-max", "1000", "--points", "3",
                      "--nodes", "4", "--delta-tol", "1e-4", "--out", str(out))
    assert code == EXIT_OK
    assert out.exists()
    assert out.with_suffix(".png").exists()
    header = out.read_text().splitlines()[1]
    assert header == "u,rho"


def test_scan_stdout(mini_config):
    code, text = run_cli("scan", "--config", mini_config, "--gas", "argon",
                         "--u-min", "800", "--u-max", "900", "--points", "2",
                         "--nodes", "4", "--delta-tol", "1e-4")
    assert code == EXIT_OK
    assert text.splitlines()[1] == "u,re_scaled,im_scaled,rho,sigma"


def test_endtoend_passes_with_mini_system(mini_config, tmp_path):
    out_dir = tmp_path / "e2e"
    # the mini system is weakly refracting; raise the pressures so the
    # phase/attenuation signals carry report-grade leverage
    code, text = run_cli("endtoend", "--config", mini_config, "--gas", "argon",
                         "--velocity", "1000", "--nodes", "8", "--delta-tol", "1e-5",
                         "--pressure-list", "0.03,0.06,0.09,0.12,0.15",
                         "--out", str(out_dir), "--seed", "3")
    assert code == EXIT_OK
    report = json.loads((out_dir / "report.json").read_text())
    assert report["ok"] is True
    assert all(c["pass"] for c in report["checks"].values())


def test_table1_theory_report(tmp_path):
    out = tmp_path / "table1.json"
    code, _ = run_cli("table1", "--nodes", "4", "--delta-tol", "1e-4",
                      "--out", str(out))
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["u_mean"] == 1075.0
    for gas in ("argon", "krypton", "xenon"):
        entry = payload["gases"][gas]
        assert entry["im_per_density"] > 0.0
        assert entry["rho"] == pytest.approx(
            entry["re_per_density"] / entry["im_per_density"], rel=1e-12)
    assert out.with_suffix(".csv").exists()


def test_console_script_entrypoint():
    proc = subprocess.run([sys.executable, "-m", "liwave.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("potential", "phaseshifts", "amplitude", "index", "scan", "cell",
                 "simulate", "analyze", "table1", "fig3", "fig4", "fig5", "endtoend"):
        assert name in proc.stdout
