import csv
import json
from pathlib import Path

import pytest

from radvar.cli import load_config, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_analyze_weight_unit(tmp_path, capsys):
    assert main(["analyze-weight", str(CONFIGS / "eta_one.json"), "--out", str(tmp_path)]) == 0
    (row,) = rows(tmp_path / "decomposition.csv")
    assert row == {"i": "1", "a_i": "0", "b_i": "1", "left_integrable": "true", "right_integrable": "true"}
    assert "seed = 0" in capsys.readouterr().out
    assert (tmp_path / "analyze_weight.txt").read_text().startswith("seed = 0")


@pytest.mark.parametrize("name", ["eta_one", "power_bump", "two_intervals", "tabulated"])
def test_build_aux_weight_configs(tmp_path, name):
    assert main(["build-aux-weight", str(CONFIGS / f"{name}.json"), "--out", str(tmp_path), "--points", "11"]) == 0
    table = rows(tmp_path / "aux_weight.csv")
    assert len(table) == 11 and set(table[0]) == {"t", "eta", "eta_hat_p", "w_tilde"}
    assert all(float(r["eta_hat_p"]) >= 0 for r in table)


def test_check_poincare_constant_profile(tmp_path):
    prof = tmp_path / "v.csv"
    prof.write_text("r,v\n0,1.5\n1,1.5\n")
    assert main(["check-poincare", str(CONFIGS / "eta_one.json"), str(prof), "--out", str(tmp_path)]) == 0
    (row,) = rows(tmp_path / "poincare.csv")
    assert float(row["lhs_i"]) == float(row["rhs_i"]) == float(row["margin_i"]) == 0.0


def test_check_poincare_not_in_domain(tmp_path):
    prof = tmp_path / "v.csv"
    prof.write_text("r,v\n0,0\n0.5,0\n0.5,1\n1,1\n")
    assert main(["check-poincare", str(CONFIGS / "eta_one.json"), str(prof), "--out", str(tmp_path)]) == 1
    assert "NotInDomain" in (tmp_path / "check_poincare.txt").read_text()


def test_minimize_round_trip(tmp_path):
    datum = tmp_path / "g.csv"
    datum.write_text("r,g\n0,0\n0.3,1\n0.6,-1\n1,0.5\n")
    cfg = str(CONFIGS / "two_intervals.json")
    assert main(["minimize", cfg, str(datum), "--grid", "33", "--out", str(tmp_path)]) == 0
    out = tmp_path / "minimizer.csv"
    assert out.read_text().splitlines()[0] == "r,u0"
    assert main(["check-poincare", cfg, str(out), "--out", str(tmp_path / "chk")]) == 0
    # the two pieces cover the whole domain, so nothing is H-indifferent
    assert "H-indifferent" not in (tmp_path / "minimize.txt").read_text()


def test_relax_demo(tmp_path):
    assert main(["relax-demo", str(CONFIGS / "power_bump.json"), "--out", str(tmp_path), "--deltas", "6"]) == 0
    table = rows(tmp_path / "density.csv")
    assert len(table) == 6
    energies = [float(r["F_u_delta"]) for r in table]
    assert energies == sorted(energies)


def test_fuzz_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["fuzz", "--seed", "42", "--cases", "100", "--out", str(out)]) == 0
    assert (a / "fuzz.csv").read_bytes() == (b / "fuzz.csv").read_bytes()
    assert (a / "fuzz.txt").read_bytes() == (b / "fuzz.txt").read_bytes()
    assert "seed = 42" in (a / "fuzz.txt").read_text()


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("RADVAR_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["analyze-weight", str(CONFIGS / "eta_one.json")]) == 0
    assert (tmp_path / "env" / "decomposition.csv").exists()


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["no-such-command"],
        ["analyze-weight", "/nonexistent.json"],
        ["minimize", str(CONFIGS / "eta_one.json"), "/nonexistent.csv"],
        ["relax-demo", str(CONFIGS / "two_intervals.json")],
        ["build-aux-weight", str(CONFIGS / "eta_one.json"), "--points", "1"],
    ],
)
def test_usage_errors(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)] if argv else argv) == 2


def test_bad_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"problem": {"d": 1, "p": 2.0, "a": 0, "b": 1}, "pieces": [{"kind": "spline"}]}))
    assert main(["analyze-weight", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text("{not json")
    assert main(["analyze-weight", str(bad), "--out", str(tmp_path)]) == 2


def test_load_config_unit():
    spec, params = load_config(CONFIGS / "eta_one.json")
    assert (params.d, params.p, params.a, params.b) == (1, 2.0, 0.0, 1.0)
    assert len(spec.pieces) == 1
