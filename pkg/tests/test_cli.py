import numpy as np
import pytest

from torusgibbs.cli import main

BASE_INI = """
[experiment]
tag = {tag}
seed = 3

[params]
p = 4.0
alpha = 1.0
mass_density = 1.0
gamma = {gamma}
beta_list = {betas}
length_list = 8
points_list = 128

[mcmc]
steps = 2000
burn_in = 400
thin = 10
"""


def write_ini(tmp_path, name="run.ini", tag="demo", gamma="1.0", betas="0, 2"):
    path = tmp_path / name
    path.write_text(BASE_INI.format(tag=tag, gamma=gamma, betas=betas))
    return str(path)


def test_minimize_prints_oracle(tmp_path, capsys):
    out = tmp_path / "profile.csv"
    code = main(["minimize", "--p", "4", "--beta", "1", "--mass", "1",
                 "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "A = " in printed
    val = float(printed.split("A = ")[1].split()[0])
    assert val == pytest.approx(-1.0 / 96.0, abs=1e-4)
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "x,Q" and len(lines) > 100


def test_minimize_zero_beta(capsys):
    assert main(["minimize", "--p", "4", "--beta", "0", "--mass", "1",
                 "--points", "512"]) == 0
    val = float(capsys.readouterr().out.split("A = ")[1].split()[0])
    assert abs(val) < 1e-8


def test_minimize_bad_args(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["minimize", "--p", "4", "--beta", "1"])  # missing --mass
    assert exc.value.code == 1
    assert main(["minimize", "--p", "7", "--beta", "1", "--mass", "1"]) == 1


def test_scan_reproducible_and_force(tmp_path, capsys):
    ini = write_ini(tmp_path)
    out = tmp_path / "results"
    assert main(["scan", "--config", ini, "--out", str(out)]) == 0
    csv1 = (out / "demo.csv").read_bytes()
    json1 = (out / "demo.json").read_bytes()
    # refuses to overwrite without --force
    assert main(["scan", "--config", ini, "--out", str(out)]) == 1
    assert main(["scan", "--config", ini, "--out", str(out), "--force"]) == 0
    assert (out / "demo.csv").read_bytes() == csv1
    assert (out / "demo.json").read_bytes() == json1


def test_scan_threads_identical(tmp_path):
    ini = write_ini(tmp_path)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["scan", "--config", ini, "--out", str(out1)]) == 0
    assert main(["scan", "--config", ini, "--out", str(out2), "--threads", "4"]) == 0
    assert (out1 / "demo.csv").read_bytes() == (out2 / "demo.csv").read_bytes()


def test_scan_empty_beta_list(tmp_path, capsys):
    ini = write_ini(tmp_path, betas=" ")
    assert main(["scan", "--config", ini, "--out", str(tmp_path / "r")]) == 1
    assert "beta_list" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[params]\nwhat = 1\n")
    assert main(["scan", "--config", str(bad), "--out", str(tmp_path / "r")]) == 1
    assert "params.what" in capsys.readouterr().err


def test_logz_anchor_only(tmp_path, capsys):
    ini = write_ini(tmp_path, betas="0")
    out = tmp_path / "r"
    assert main(["logz", "--config", ini, "--out", str(out)]) == 0
    lines = (out / "demo.csv").read_text().strip().split("\n")
    data = [ln for ln in lines if not ln.startswith("#")]
    assert len(data) == 2  # header + the single anchor row
    assert any(ln.startswith("# seed:") for ln in lines)


def test_tail_cli(tmp_path):
    path = tmp_path / "tail.ini"
    path.write_text("""
[experiment]
tag = tails
seed = 5
[params]
length_list = 64
points_list = 512
intervals = 16
tail_samples = 2000
tail_grid = 0.25, 0.5, 0.75, 1.0
""")
    out = tmp_path / "r"
    assert main(["tail", "--config", str(path), "--out", str(out)]) == 0
    assert (out / "tails.csv").exists() and (out / "tails.json").exists()


def test_sample_tainted_exit(tmp_path):
    path = tmp_path / "slow.ini"
    path.write_text("""
[experiment]
tag = slow
seed = 1
[params]
gamma = 1.0
beta_list = 3.0
length_list = 8
points_list = 128
[mcmc]
steps = 1500
burn_in = 300
thin = 1
step_size = 0.02
""")
    code = main(["sample", "--config", str(path), "--out", str(tmp_path / "r")])
    assert code == 3  # mixing warning taints the run


def test_ou_cli(tmp_path):
    path = tmp_path / "ou.ini"
    path.write_text("""
[experiment]
tag = ou
seed = 2
[params]
gamma = 2.0
beta_list = 1.0
length_list = 16
points_list = 256
lags = 0, 1
ou_window = 2
[mcmc]
steps = 3000
burn_in = 600
thin = 10
""")
    out = tmp_path / "r"
    assert main(["ou", "--config", str(path), "--out", str(out)]) == 0
    header = next(ln for ln in (out / "ou.csv").read_text().split("\n")
                  if not ln.startswith("#"))
    assert "target" in header
