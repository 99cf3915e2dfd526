import json
import subprocess
import sys

import pytest

from conrec.cli import bounds_table, main


def test_demo_1d(capsys):
    assert main(["demo-1d", "--n", "10", "--trials", "200000", "--seed", "7"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 2
    assert all(line.startswith("PASS") for line in out)
    assert "0.06060606" in out[0] and "0.1060606" in out[1]


def test_bounds_table(capsys):
    assert main(["bounds", "--d", "3", "--n", "1000", "--delta", "1"]) == 0
    out = capsys.readouterr().out
    assert "8.762" in out
    rows = dict(bounds_table(3, 1000, 1.0))
    assert rows["lower-limit constant lim N^2 E|R_N|^2"] == pytest.approx(8.0)
    assert rows["uniform upper bound leading term"] == pytest.approx(8.7625, abs=1e-3)


def test_bounds_marks_invalid_entries():
    rows = dict(bounds_table(3, 4, 1.0))
    assert str(rows["uniform upper bound"]).startswith("n/a")


def test_bounds_one_dim():
    rows = dict(bounds_table(1, 10, 1.0))
    assert rows["1d worst MSE 14d^2/((N+1)(N+2))"] == pytest.approx(14 / 132)


def test_radial(capsys):
    assert main(["radial", "--d", "3", "--n", "15", "--trials", "40000", "--seed", "1"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_mse_sweep_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["mse-sweep", "--d", "2", "--n-list", "4,6", "--trials", "100", "--seed", "5",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert json.loads(lines[0][len("# config: "):])["seed"] == 5
    assert lines[1].startswith("d,N,trials,")
    assert len(lines) == 4


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 2, "n_list": [4, 6], "trials": 100, "seed": 1}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["mse-sweep", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["mse-sweep", "--config", str(cfg), "--seed", "2", "--out", str(b)]) == 0
    assert '"seed":1' in a.read_text().splitlines()[0]
    assert '"seed":2' in b.read_text().splitlines()[0]


def test_env_seed(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RECON_SEED", "17")
    out = tmp_path / "e.csv"
    assert main(["mse-sweep", "--d", "2", "--n-list", "4", "--trials", "100", "--out", str(out)]) == 0
    assert '"seed":17' in out.read_text()


@pytest.mark.parametrize("argv,field", [
    (["mse-sweep", "--d", "2", "--n-list", "6,4", "--trials", "100"], "n_list"),
    (["mse-sweep", "--d", "2", "--n-list", "4", "--trials", "0"], "trials"),
    (["mse-sweep", "--d", "2", "--n-list", "4", "--trials", "100", "--law", "nope"], "law"),
    (["coverage", "--theta", "2.0"], "theta"),
    (["bounds", "--d", "0"], "d"),
])
def test_config_errors_exit_2(argv, field, capsys):
    assert main(argv) == 2
    assert field in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 2, "colour": "red"}))
    assert main(["mse-sweep", "--config", str(cfg)]) == 2
    assert "colour" in capsys.readouterr().err


def test_all_rows_over_cap_exit_1(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["mse-sweep", "--d", "3", "--n-list", "10", "--trials", "100",
                 "--enum-cap", "10", "--out", str(out)]) == 1
    assert "capacity" in out.read_text()


def test_coverage(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["coverage", "--d", "2", "--n-list", "5", "--theta", "1.5707963", "--trials", "20000",
                 "--seed", "1", "--out", str(out)]) == 0
    header, row = out.read_text().splitlines()[1:3]
    rec = dict(zip(header.split(","), row.split(",")))
    assert abs(float(rec["estimate"]) - 0.3125) < 0.02


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "conrec", "bounds", "--d", "2", "--n", "50"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert "C_d" in r.stdout


def test_bad_subcommand():
    assert main(["frobnicate"]) == 2
