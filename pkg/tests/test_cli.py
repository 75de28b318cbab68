import subprocess
import sys

import pytest

from lpwave.cli import load_config, main, parse_range, ConfigError


def manifest(out):
    return (out / "manifest.txt").read_text()


def test_parse_range():
    assert parse_range("4..8") == [4, 5, 6, 7, 8]
    assert parse_range("1,3") == [1, 3]


def test_load_config_rejects_unknown_key(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[simulation]\nn = 64\nbogus = 1\n")
    with pytest.raises(ConfigError, match="bogus"):
        load_config(str(ini), [])


def test_overrides_apply(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[simulation]\nn = 64\n")
    cfg = load_config(str(ini), ["simulation.n=128", "coefficient.class_tag=smooth"])
    assert cfg["simulation"]["n"] == "128" and cfg["coefficient"]["class_tag"] == "smooth"


def test_simulate_writes_trajectory(tmp_path):
    out = tmp_path / "run"
    code = main(["simulate", "--out", str(out), "--set", "simulation.n=64", "--set", "simulation.nu=2",
                 "--set", "simulation.T=0.2", "--set", "simulation.energy=true"])
    assert code == 0
    rows = (out / "trajectory.csv").read_text().splitlines()
    assert rows[0] == "t,H1mtheta_u,Hmtheta_ut,Hmtheta_Lu,E_theta" and len(rows) > 2
    assert (out / "final_u.bin").exists() and (out / "final_ut.bin").exists()
    text = manifest(out)
    assert "exit_status: 0" in text and "config_hash:" in text
    assert sum(1 for line in text.splitlines() if line.startswith("  ") and ": lpwave" in line) == 12


def test_bad_key_exits_one(tmp_path, capsys):
    code = main(["simulate", "--out", str(tmp_path), "--set", "simulation.nonsense=3"])
    assert code == 1
    assert "nonsense" in capsys.readouterr().err
    assert "exit_status: 1" in manifest(tmp_path)


def test_bad_coefficient_value_exits_one(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--set", "coefficient.class_tag=unknown"]) == 1


def test_instability_exits_three(tmp_path):
    code = main(["simulate", "--out", str(tmp_path), "--set", "simulation.n=128", "--set", "simulation.nu=3",
                 "--set", "simulation.T=5", "--set", "simulation.cfl_factor=3"])
    assert code == 3
    assert "exit_status: 3" in manifest(tmp_path)


def test_amplification_csv(tmp_path):
    code = main(["amplification", "--out", str(tmp_path), "--family", "smooth", "--nu", "3..4", "--theta", "0"])
    assert code == 0
    rows = (tmp_path / "amplification_smooth_theta0.csv").read_text().splitlines()
    assert rows[0] == "nu,A,beta_hat" and len(rows) == 3


def test_runs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["decompose", "--out", str(out), "--n", "256", "--seed", "7"]) == 0
    for name in ("blocks.csv", "spectrum.csv", "criterion_1.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    hashes = [next(l for l in manifest(o).splitlines() if l.startswith("config_hash")) for o in (a, b)]
    assert hashes[0] == hashes[1]


def test_sweep_subset(tmp_path, capsys):
    assert main(["sweep", "--out", str(tmp_path), "--criteria", "1,3"]) == 0
    lines = (tmp_path / "acceptance.csv").read_text().splitlines()
    assert lines[0] == "criterion,title,passed,command" and len(lines) == 3
    assert capsys.readouterr().out.count("[PASS]") == 2


def test_sweep_unknown_criterion(tmp_path):
    assert main(["sweep", "--out", str(tmp_path), "--criteria", "13"]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lpwave.cli", "regularity", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.split()[:2] == ["[PASS]", "3"]
    assert (tmp_path / "dyadic_weierstrass.csv").exists()
