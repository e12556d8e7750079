import json
import subprocess
import sys

from edgepump.cli import main


def test_no_arguments_is_usage_error():
    assert main([]) == 1


def test_unknown_flag_is_usage_error(tmp_path):
    assert main(["bands", "--bogus", "1"]) == 1


def test_unknown_recipe_is_usage_error(tmp_path):
    assert main(["recipe", "fig9", "--out-dir", str(tmp_path)]) == 1


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "bands" in capsys.readouterr().out


def test_bands_smoke(tmp_path):
    rc = main(["bands", "--L", "21", "--ngrid", "16",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "band.csv").exists()
    body = json.loads((tmp_path / "manifest.json").read_text())
    assert body["kind"] == "band-diagram"
    assert "L = 21" in body["config"]


def test_bands_deterministic(tmp_path):
    args = ["bands", "--L", "21", "--ngrid", "8", "--out-dir", str(tmp_path)]
    assert main(args) == 0
    first = ((tmp_path / "band.csv").read_bytes(),
             (tmp_path / "manifest.json").read_bytes())
    assert main(args) == 0
    assert (tmp_path / "band.csv").read_bytes() == first[0]
    assert (tmp_path / "manifest.json").read_bytes() == first[1]


def test_evolve_smoke(tmp_path):
    rc = main(["evolve", "--L", "21", "--T", "60", "--dt", "0.05",
               "--samples", "9", "--out-dir", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,theta,norm,X_mean,rho_13,rho_14"
    assert len(lines) == 10
    body = json.loads((tmp_path / "manifest.json").read_text())
    assert body["convergence"]["mode"] == "fixed"


def test_evolve_site_densities(tmp_path):
    rc = main(["evolve", "--L", "21", "--T", "40", "--dt", "0.05",
               "--samples", "3", "--site-densities",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header.endswith(",p_20,p_21")


def test_evolve_without_edge_state_is_numerical_failure(tmp_path):
    rc = main(["evolve", "--L", "12", "--lam", "0", "--T", "40",
               "--out-dir", str(tmp_path)])
    assert rc == 2


def test_oversized_dt_is_usage_error(tmp_path):
    rc = main(["evolve", "--L", "21", "--T", "40", "--dt", "5.0",
               "--out-dir", str(tmp_path)])
    assert rc == 1


def test_lzs_smoke(tmp_path):
    rc = main(["lzs", "--T", "20", "--out-dir", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "lzs.csv").read_text().splitlines()
    assert lines[0] == "t,rho,energy_gap"
    body = json.loads((tmp_path / "manifest.json").read_text())
    assert body["norm_drift"] < 1e-12


def test_sweep_t_smoke(tmp_path):
    rc = main(["sweep-t", "--L", "21", "--dt", "0.05",
               "--t-grid", "100,150", "--out-dir", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("T,rho_13")
    assert len(lines) == 3


def test_sweep_t_bad_grid(tmp_path):
    assert main(["sweep-t", "--L", "21", "--t-grid", "5:1:1",
                 "--out-dir", str(tmp_path)]) == 1
    assert main(["sweep-t", "--L", "21", "--t-grid", "1:9:2:3",
                 "--out-dir", str(tmp_path)]) == 1


def test_ensemble_needs_disorder(tmp_path):
    assert main(["ensemble", "--L", "21", "--seeds", "0,1",
                 "--out-dir", str(tmp_path)]) == 1


def test_config_file_with_override(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("L = 34\nT = 50\n")
    out = tmp_path / "out"
    rc = main(["bands", "--config", str(cfgfile), "--L", "21",
               "--ngrid", "8", "--out-dir", str(out)])
    assert rc == 0
    body = json.loads((out / "manifest.json").read_text())
    assert "L = 21" in body["config"]       # CLI flag wins


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "edgepump", "bands", "--L", "21",
         "--ngrid", "8", "--out-dir", str(tmp_path)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "band.csv").exists()
