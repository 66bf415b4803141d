"""Experiment harness: config validation, overrides, runs, reports, CLI.

Scenario runs here use reduced grids and horizons so the whole file stays
fast; the full-size stock configurations are exercised by the acceptance
suite.  Each smoke run still asserts the scenario's own verdicts, so the
physics checks run end to end, just on a smaller box.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from oldroyd2d.cli import main
from oldroyd2d.scenarios import (
    SCENARIOS,
    RunReport,
    ScenarioConfig,
    Thresholds,
    Verdict,
    apply_overrides,
    default_config,
    run_scenario,
)


def build_config(scenario, overrides=(), out_dir=None):
    doc = apply_overrides(default_config(scenario), overrides)
    if out_dir is not None:
        doc["out_dir"] = str(out_dir)
    return ScenarioConfig.from_dict(doc)


#: reduced-size overrides per scenario, calibrated to keep every verdict green
QUICK = {
    "euler_regression": ["grid.n=32", "stepper.t_end=1.0", "stepper.dt=0.05", "stepper.sample_every=2"],
    "lp_selftest": ["grid.n=32"],
    "decay_a0": ["grid.n=32", "stepper.t_end=1.0", "stepper.dt=0.1", "stepper.sample_every=1"],
    "decay_positive_a": ["grid.n=32", "stepper.t_end=8.0", "stepper.dt=0.1", "stepper.sample_every=2"],
    "instability_gap": ["grid.n=64", "stepper.t_end=18.0"],
    "local_convergence": ["grid.n=32", "stepper.t_end=0.5"],
}


# ---------------------------------------------------------------------------
# configuration objects


def test_threshold_validation():
    with pytest.raises(ValueError, match="gap_fraction"):
        Thresholds(gap_fraction=0.0)
    assert Thresholds().delta == pytest.approx(40 * Thresholds().eps0)


def test_config_rejects_unknown_scenario_and_wrong_data_kind():
    with pytest.raises(ValueError, match="unknown scenario"):
        build_config("euler_regression", ["scenario=turbulence"])
    with pytest.raises(ValueError, match="requires data kind 'small_family'"):
        build_config("decay_a0", ["data.kind=stream"])


def test_config_enforces_the_coupling_sign_per_scenario():
    with pytest.raises(ValueError, match="decay_a0 requires params.a == 0"):
        build_config("decay_a0", ["params.a=0.5"])
    with pytest.raises(ValueError, match="requires params.a > 0"):
        build_config("decay_positive_a", ["params.a=0"])
    with pytest.raises(ValueError, match="requires params.a > 0"):
        build_config("local_convergence", ["params.a=0"])


def test_instability_config_requires_a_box_that_fits_the_data():
    with pytest.raises(ValueError, match="length >= 8/a"):
        build_config("instability_gap", ["grid.length=6.283", "data.a=1.0", "params.a=1.0"])


def test_from_dict_round_trips_every_stock_config():
    for name in SCENARIOS:
        doc = default_config(name)
        cfg = ScenarioConfig.from_dict(doc)
        again = ScenarioConfig.from_dict(cfg.to_dict())
        assert again.to_dict() == cfg.to_dict()
        assert cfg.scenario == name
    with pytest.raises(ValueError, match="unknown scenario"):
        default_config("mixing_layer")


def test_from_dict_rejects_malformed_documents():
    doc = default_config("decay_a0")
    doc["extra"] = 1
    with pytest.raises(ValueError, match="unknown top-level config keys"):
        ScenarioConfig.from_dict(doc)
    doc = default_config("decay_a0")
    doc["stepper"]["ramp"] = True
    with pytest.raises(ValueError, match="unknown keys in 'stepper'"):
        ScenarioConfig.from_dict(doc)
    doc = default_config("decay_a0")
    del doc["grid"]
    with pytest.raises(ValueError, match="missing required key 'grid'"):
        ScenarioConfig.from_dict(doc)


def test_apply_overrides_parses_json_with_string_fallback():
    doc = {"stepper": {"dt": 0.1}}
    apply_overrides(doc, ["stepper.dt=0.01", "data.kind=small_family", "out_dir=/tmp/x"])
    assert doc["stepper"]["dt"] == 0.01
    assert doc["data"] == {"kind": "small_family"}
    assert doc["out_dir"] == "/tmp/x"
    with pytest.raises(ValueError, match="path=value"):
        apply_overrides(doc, ["stepper.dt"])
    with pytest.raises(ValueError, match="descends through a non-section"):
        apply_overrides(doc, ["out_dir.deep=1"])


# ---------------------------------------------------------------------------
# reports


def make_report(verdict_flags, blowups=()):
    verdicts = [Verdict(f"v{i}", flag, {}, "series.csv") for i, flag in enumerate(verdict_flags)]
    return RunReport(
        scenario="decay_a0",
        config={},
        verdicts=verdicts,
        series_files={},
        info={},
        wall_seconds=0.0,
        step_count=0,
        blowups=list(blowups),
    )


def test_report_exit_codes():
    assert make_report([True, True]).exit_code == 0
    assert make_report([True, False]).exit_code == 1
    burst = make_report([True, True], blowups=[{"time": 1.0}])
    assert burst.exit_code == 2
    assert not burst.passed
    doc = make_report([True]).to_json_dict()
    assert doc["passed"] is True and doc["exit_code"] == 0
    assert doc["verdicts"][0]["name"] == "v0"


# ---------------------------------------------------------------------------
# scenario runs (reduced size)


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_each_scenario_passes_at_reduced_size(scenario, tmp_path):
    cfg = build_config(scenario, QUICK[scenario], out_dir=tmp_path)
    report = run_scenario(cfg)
    assert report.passed, [v.to_json_dict() for v in report.verdicts if not v.passed]
    assert report.exit_code == 0
    assert not report.blowups
    assert (tmp_path / "report.json").exists()
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["scenario"] == scenario
    assert on_disk["passed"] is True
    for filename in report.series_files.values():
        assert (tmp_path / filename).exists()
    if scenario != "lp_selftest":
        assert report.step_count > 0


def test_runs_are_deterministic_byte_for_byte(tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    for d in (a_dir, b_dir):
        run_scenario(build_config("decay_a0", QUICK["decay_a0"], out_dir=d))
    assert (a_dir / "series.csv").read_bytes() == (b_dir / "series.csv").read_bytes()


def test_dry_run_without_out_dir_writes_nothing(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    report = run_scenario(build_config("decay_a0", QUICK["decay_a0"]))
    assert report.passed
    assert list(tmp_path.iterdir()) == []


# ---------------------------------------------------------------------------
# command line


def test_cli_lists_every_scenario(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out.split()
    assert out == list(SCENARIOS)


def test_cli_validate_accepts_good_and_rejects_bad_configs(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(default_config("decay_a0")))
    assert main(["validate", "--config", str(good)]) == 0
    assert "config ok" in capsys.readouterr().out

    bad_doc = default_config("decay_a0")
    bad_doc["params"]["a"] = 0.5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(bad_doc))
    assert main(["validate", "--config", str(bad)]) == 1
    assert "invalid config" in capsys.readouterr().err


def test_cli_rejects_unknown_scenarios_and_bad_overrides(capsys):
    assert main(["run", "--scenario", "vortex_street"]) == 1
    assert "unknown scenario" in capsys.readouterr().err
    assert main(["run", "--scenario", "decay_a0", "--override", "params.b=1.5"]) == 1
    assert "invalid config" in capsys.readouterr().err


def test_cli_usage_errors_exit_one():
    with pytest.raises(SystemExit) as err:
        main(["run"])  # --scenario is required
    assert err.value.code == 1


def test_cli_thread_cap_must_be_a_positive_integer(monkeypatch):
    monkeypatch.setenv("OLDROYD2D_THREADS", "zero")
    with pytest.raises(SystemExit, match="OLDROYD2D_THREADS"):
        main(["run", "--scenario", "lp_selftest", "--override", "grid.n=32"])


def test_cli_runs_a_scenario_end_to_end(tmp_path, capsys):
    args = ["run", "--scenario", "decay_a0", "--out", str(tmp_path)]
    args += [f"--override={o}" for o in QUICK["decay_a0"]]
    assert main(args) == 0
    out = capsys.readouterr().out
    assert "[pass] no_blowup" in out
    assert "decay_a0: PASS" in out
    assert (tmp_path / "series.csv").exists()
    assert (tmp_path / "report.json").exists()


def test_module_entry_point_is_wired():
    proc = subprocess.run(
        [sys.executable, "-m", "oldroyd2d.cli", "list-scenarios"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.split() == list(SCENARIOS)
