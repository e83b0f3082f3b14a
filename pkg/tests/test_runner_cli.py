import csv
import math
from pathlib import Path

import numpy as np
import pytest

from gausschain.channels import compose_chain
from gausschain.cli import main
from gausschain.errors import ValidationError
from gausschain.runner import applicable_analyses, run
from gausschain.scenario import parse_scenario

PSA_SWEEP = """
name = psa-sandwich
outputs = compose, decompose, eb, thresholds, bound

[segment]
kind = loss
eta = 0.5

[segment]
kind = psa
gain = 2.0

[segment]
kind = loss
eta = 0.5

[sweep]
parameter = segment[2].gain
min = 1.0
max = 5.0
steps = 81
"""

BOUND_ONLY = """
name = half-loss
outputs = bound

[segment]
kind = loss
eta = 0.5
"""


def read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_applicable_analyses():
    scenario = parse_scenario(PSA_SWEEP)
    assert applicable_analyses(scenario) == ("compose", "decompose", "eb", "thresholds", "bound")
    assert applicable_analyses(parse_scenario(BOUND_ONLY)) == ("compose", "bound")


def test_eb_sweep_hits_the_flip(tmp_path):
    scenario = parse_scenario(PSA_SWEEP)
    result = run(scenario, analyses=("eb",), out_dir=tmp_path)
    assert result.numeric_ok
    rows = read_rows(tmp_path / "psa-sandwich__eb.csv")
    assert len(rows) == 81
    at_three = [r for r in rows if float(r["gain"]) == 3.0]
    assert len(at_three) == 1
    assert abs(float(at_three[0]["margin_closed_form"])) < 1e-9
    assert at_three[0]["eb_flag"] == "true"
    below = [r for r in rows if float(r["gain"]) < 3.0]
    assert all(r["eb_flag"] == "false" for r in below)


def test_compose_csv_reparses_to_the_computed_values(tmp_path):
    scenario = parse_scenario(BOUND_ONLY)
    run(scenario, analyses=("compose",), out_dir=tmp_path)
    rows = read_rows(tmp_path / "half-loss__compose.csv")
    total = compose_chain([spec.to_channel() for spec in scenario.segments])
    lookup = {"transfer": total.transfer, "noise": total.noise, "shift": total.shift.reshape(-1, 1)}
    for row in rows:
        got = float(row["value"])
        want = float(lookup[row["component"]][int(row["row"]), int(row["col"])])
        assert got == want  # 17 significant digits round-trip doubles exactly


def test_decompose_reports_recomposition(tmp_path):
    scenario = parse_scenario(PSA_SWEEP).with_sweep_value(2.0)
    result = run(scenario, analyses=("decompose",), out_dir=tmp_path)
    assert result.numeric_ok
    rows = read_rows(tmp_path / "psa-sandwich__decompose.csv")
    err_rows = [r for r in rows if r["component"] == "recomposition_error"]
    assert err_rows and all(float(r["value"]) < 1e-9 for r in err_rows)
    assert any(r["component"] == "mixed_cov" for r in rows)
    assert "recomposition error" in result.report


def test_bound_report_spot_value(tmp_path):
    result = run(parse_scenario(BOUND_ONLY), analyses=("bound",), out_dir=tmp_path)
    assert "R_UB = 1.5849625007 bits/mode" in result.report
    rows = read_rows(tmp_path / "half-loss__bound.csv")
    assert float(rows[0]["rate_upper_bound_bits_per_mode"]) == math.log2(3.0)


def test_runs_are_byte_identical(tmp_path):
    scenario = parse_scenario(PSA_SWEEP)
    a = tmp_path / "a"
    b = tmp_path / "b"
    run(scenario, analyses=("eb", "bound"), out_dir=a, workers=1, seed=7)
    run(scenario, analyses=("eb", "bound"), out_dir=b, workers=4, seed=7)
    for name in ("psa-sandwich__eb.csv", "psa-sandwich__bound.csv", "psa-sandwich__report.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_eb_requires_a_sandwich(tmp_path):
    with pytest.raises(ValidationError):
        run(parse_scenario(BOUND_ONLY), analyses=("eb",), out_dir=tmp_path)


def test_threshold_requires_amplifier_sandwich(tmp_path):
    text = PSA_SWEEP.replace("kind = psa\ngain = 2.0", "kind = rotation\ntheta = 0.3")
    text = text.replace("parameter = segment[2].gain\nmin = 1.0\nmax = 5.0", "parameter = segment[2].theta\nmin = 0.0\nmax = 1.0")
    scenario = parse_scenario(text)
    with pytest.raises(ValidationError):
        run(scenario, analyses=("thresholds",), out_dir=tmp_path)


def test_threshold_analysis_matches_closed_form(tmp_path):
    scenario = parse_scenario(PSA_SWEEP).with_sweep_value(2.0)
    result = run(scenario, analyses=("thresholds",), out_dir=tmp_path)
    rows = read_rows(tmp_path / "psa-sandwich__thresholds.csv")
    assert float(rows[0]["threshold_closed_form"]) == 3.0
    assert abs(float(rows[0]["threshold_bisection"]) - 3.0) <= 1e-9
    assert result.numeric_ok


def test_decompose_extracts_shifts(tmp_path):
    text = """
name = shifted
outputs = decompose

[segment]
kind = loss
eta = 0.8

[segment]
kind = custom
n = 1
transfer = [1.0, 0.0, 0.0, 1.0]
noise = [0.3, 0.0, 0.0, 0.3]
shift = [0.5, -0.25]

[segment]
kind = loss
eta = 0.9
"""
    result = run(parse_scenario(text), analyses=("decompose",), out_dir=tmp_path, seed=3)
    assert result.numeric_ok
    assert "shifts extracted" in result.report


def test_cli_happy_paths(tmp_path, capsys):
    scn = tmp_path / "s.scn"
    scn.write_text(PSA_SWEEP.replace("steps = 81", "steps = 5"), encoding="utf-8")
    for command in ("compose", "decompose", "eb", "threshold", "bound", "chain"):
        code = main([command, "--scenario", str(scn), "--out", str(tmp_path / command)])
        assert code == 0, (command, capsys.readouterr())
    out = capsys.readouterr().out
    assert "scenario: psa-sandwich" in out


def test_cli_uses_output_env_var(tmp_path, capsys, monkeypatch):
    scn = tmp_path / "s.scn"
    scn.write_text(BOUND_ONLY, encoding="utf-8")
    monkeypatch.setenv("GAUSSCHAIN_OUT", str(tmp_path / "from-env"))
    assert main(["bound", "--scenario", str(scn)]) == 0
    assert (tmp_path / "from-env" / "half-loss__bound.csv").exists()


def test_cli_validation_failures(tmp_path, capsys):
    missing = main(["bound", "--scenario", str(tmp_path / "nope.scn")])
    assert missing == 1
    bad = tmp_path / "bad.scn"
    bad.write_text("[segment]\nkind = loss\neta = 1.5\n", encoding="utf-8")
    assert main(["bound", "--scenario", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "eta" in err
    # structurally fine scenario, wrong shape for the eb analysis
    shapeless = tmp_path / "shapeless.scn"
    shapeless.write_text(BOUND_ONLY, encoding="utf-8")
    assert main(["eb", "--scenario", str(shapeless), "--out", str(tmp_path)]) == 1


def test_cli_json_scenario(tmp_path):
    doc = tmp_path / "s.json"
    doc.write_text('{"name": "j", "segments": [{"kind": "loss", "eta": 0.5}]}', encoding="utf-8")
    assert main(["bound", "--scenario", str(doc), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "j__bound.csv").exists()


def test_cli_selftest_exit_codes(monkeypatch, capsys):
    from gausschain import cli, selfcheck

    def fake_run_all(seed, fault=None):
        ok = fault is None
        return [selfcheck.CheckResult("fake", ok, "stub", 0.0)]

    monkeypatch.setattr(cli.selfcheck, "run_all", fake_run_all)
    assert main(["selftest"]) == 0
    assert main(["selftest", "--inject-fault", "compose-noise"]) == 2
    out = capsys.readouterr().out
    assert "[FAIL] fake" in out
