import csv
import json

from gibbstv.cli import main, shipped_scenarios


def test_scenarios_listed(capsys):
    assert main(["scenarios"]) == 0
    out = capsys.readouterr().out.split()
    assert {"strauss_gamma", "poisson_hardcore", "discretize_strauss"} <= set(out)
    assert len(shipped_scenarios()) >= 6


def test_bound_vacuous_sweep_exit_2(tmp_path):
    assert main(["bound", "--scenario", "bound_strauss_sweep", "--out", str(tmp_path)]) == 2
    rep = json.loads((tmp_path / "report.json").read_text())
    assert len(rep["results"]) == 4
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert len(rows) == 4
    assert "bound" in rows[0] and "c1" in "".join(rows[0])


def test_bound_ok_exit_0(tmp_path):
    assert main(["bound", "--scenario", "poisson_hardcore", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert abs(rep["results"][0]["report"]["bound"] - 0.12566370614359174) < 1e-12


def test_missing_scenario_exit_1(tmp_path, capsys):
    assert main(["verify", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_bad_scenario_exit_1(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"name": "bad", "task": "verify", "model_xi": {"kind": "Nope"}}))
    assert main(["simulate", "--scenario", str(p), "--out", str(tmp_path)]) == 1


def test_simulate_and_couple(tmp_path):
    assert main(["simulate", "--scenario", "simulate_strauss", "--reps", "50", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["n"] == 50
    out2 = tmp_path / "c"
    assert main(["couple", "--scenario", "couple_strauss", "--reps", "20", "--out", str(out2)]) == 0


def test_verify_seed_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["verify", "--scenario", "poisson_hardcore", "--reps", "200", "--seed", "3", "--out", str(d)]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
