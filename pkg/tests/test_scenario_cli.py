"""Configuration schema, presets, env overrides, and the CLI surface."""

import json
import subprocess
import sys

import pytest

from apdim import cli, scenario


def test_preset_open_values():
    scn = scenario.preset("table1-open", use_env=False)
    assert scn.area.lx == 100.0 and scn.area.ly == 100.0
    assert scn.area.wx == 0 and scn.area.wy == 0
    assert scn.propagation.alpha == 2.0 and scn.propagation.lw_db == 0.0
    assert scn.propagation.l0_db == 37.0
    assert scn.traffic.omega == 0.2 and scn.traffic.lambda_u_per_km2 == 1e5
    assert scn.radio.pt_mw == 100.0 and scn.radio.gamma_t_db == 3.0
    assert scn.radio.beta == 0.05 and scn.radio.sigma_z2 == 1.0
    assert scn.wifi.k_wifi == 3 and scn.wifi.eta_wifi == 2.7
    assert scn.wifi.cs_thr_baseline_dbm == -85.0
    assert scn.wifi.cs_thr_aggressive_dbm == -65.0
    assert scn.static.eta_sta == 3.75 and scn.zf.eta_zf == 3.75
    assert scn.zf.rho == 0.9 and scn.zf.delta == 0.02


def test_preset_obstructed_values():
    scn = scenario.preset("table1-obstructed", use_env=False)
    assert scn.propagation.alpha == 4.0 and scn.propagation.lw_db == 10.0
    assert scn.area.wx == 4 and scn.area.wy == 4  # 25 rooms


def test_preset_unknown():
    with pytest.raises(scenario.ScenarioError):
        scenario.preset("table2")


def test_round_trip_structural_identity(tmp_path):
    scn = scenario.preset("table1-obstructed", use_env=False)
    path = tmp_path / "scn.json"
    path.write_text(json.dumps(scn.to_dict()))
    again = scenario.load_scenario(str(path), use_env=False)
    assert again == scn


def test_schema_rejects_out_of_range_beta():
    raw = scenario.preset_raw("table1-open")
    raw["radio"]["beta"] = 1.5
    with pytest.raises(scenario.ScenarioError, match="beta"):
        scenario.from_dict(raw)


def test_schema_rejects_unknown_key():
    raw = scenario.preset_raw("table1-open")
    raw["radio"]["noise_figure_db"] = 9.0
    with pytest.raises(scenario.ScenarioError, match="noise_figure_db"):
        scenario.from_dict(raw)
    raw = scenario.preset_raw("table1-open")
    raw["antenna"] = {}
    with pytest.raises(scenario.ScenarioError, match="antenna"):
        scenario.from_dict(raw)


def test_schema_rejects_missing_key():
    raw = scenario.preset_raw("table1-open")
    del raw["traffic"]["omega"]
    with pytest.raises(scenario.ScenarioError, match="omega"):
        scenario.from_dict(raw)


def test_schema_rejects_bad_types():
    raw = scenario.preset_raw("table1-open")
    raw["wifi"]["k_wifi"] = 2.5
    with pytest.raises(scenario.ScenarioError, match="k_wifi"):
        scenario.from_dict(raw)
    raw = scenario.preset_raw("table1-open")
    raw["demand_gb_month"] = [5.0, 1.0]
    with pytest.raises(scenario.ScenarioError, match="demand_gb_month"):
        scenario.from_dict(raw)


def test_env_override_applies():
    raw = scenario.preset_raw("table1-open")
    out = scenario.apply_env_overrides(
        raw, environ={"APDIM_ENGINE__N_SNAPSHOTS": "25", "APDIM_RADIO__BANDWIDTH_MHZ": "20.0"}
    )
    assert out["engine"]["n_snapshots"] == 25
    assert out["radio"]["bandwidth_mhz"] == 20.0
    assert raw["engine"]["n_snapshots"] == 500  # original untouched


def test_env_override_rejects_unknown_path():
    raw = scenario.preset_raw("table1-open")
    with pytest.raises(scenario.ScenarioError, match="APDIM_RADIO__NOISE"):
        scenario.apply_env_overrides(raw, environ={"APDIM_RADIO__NOISE": "1"})


def test_sigma2_and_threshold_derivations():
    scn = scenario.preset("table1-open", use_env=False)
    assert scn.sigma2_mw == pytest.approx(2.484e-10, rel=1e-9)
    assert scn.gamma_t_linear == pytest.approx(10 ** 0.3)


# --- CLI ------------------------------------------------------------------------

def _run_cli(args, env_extra=None):
    import os

    env = dict(os.environ)
    env.pop("APDIM_TEST", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "apdim.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )


def test_cli_validate_preset():
    proc = _run_cli(["validate", "--preset", "table1-open"])
    assert proc.returncode == 0
    assert "ok" in proc.stdout


def test_cli_validate_dump_round_trips():
    proc = _run_cli(["validate", "--preset", "table1-obstructed", "--dump"])
    assert proc.returncode == 0
    raw = json.loads(proc.stdout)
    assert raw["propagation"]["alpha"] == 4.0


def test_cli_validate_bad_file(tmp_path):
    path = tmp_path / "bad.json"
    raw = scenario.preset_raw("table1-open")
    raw["radio"]["beta"] = 1.5
    path.write_text(json.dumps(raw))
    proc = _run_cli(["validate", "--scenario", str(path)])
    assert proc.returncode == 2
    assert "beta" in proc.stderr


def test_cli_empty_systems_usage_error(tmp_path):
    proc = _run_cli(
        ["run", "--preset", "table1-open", "--systems", "", "--out", str(tmp_path / "o.csv")]
    )
    assert proc.returncode != 0


def test_cli_unknown_system(tmp_path):
    proc = _run_cli(
        ["run", "--preset", "table1-open", "--systems", "wimax", "--out", str(tmp_path / "o.csv")]
    )
    assert proc.returncode == 2
    assert "wimax" in proc.stderr


def test_cli_run_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "run.csv"
    proc = _run_cli(
        [
            "run",
            "--preset",
            "table1-open",
            "--systems",
            "zf-ideal",
            "--out",
            str(out),
            "--snapshots",
            "80",
            "--quiet",
        ],
        env_extra={"APDIM_DEMAND_GB_MONTH": "[1.0]", "APDIM_ENGINE__LADDER_MAX_APS": "4"},
    )
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    from apdim.results import RESULT_COLUMNS

    assert lines[0] == ",".join(RESULT_COLUMNS)
    assert len(lines) >= 2
    manifest = json.loads((tmp_path / "run.csv.manifest.json").read_text())
    assert manifest["tool"] == "apdim"
    assert manifest["dimensioning"]["zf-ideal"][0]["feasible"] is True


def test_cli_sweep_writes_demand_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    proc = _run_cli(
        [
            "sweep",
            "--preset",
            "table1-open",
            "--systems",
            "zf-ideal",
            "--out",
            str(out),
            "--snapshots",
            "80",
            "--quiet",
        ],
        env_extra={"APDIM_DEMAND_GB_MONTH": "[1.0, 5.0]", "APDIM_ENGINE__LADDER_MAX_APS": "4"},
    )
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    from apdim.results import SWEEP_COLUMNS

    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 3  # two demand points, one system


def test_cli_repeat_run_byte_identical(tmp_path):
    env = {"APDIM_DEMAND_GB_MONTH": "[1.0]", "APDIM_ENGINE__LADDER_MAX_APS": "6"}
    args = [
        "run",
        "--preset",
        "table1-open",
        "--systems",
        "wifi-baseline,zf-ideal",
        "--snapshots",
        "50",
        "--seed",
        "123",
        "--quiet",
    ]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _run_cli(args + ["--out", str(a)], env_extra=env).returncode == 0
    assert _run_cli(args + ["--out", str(b)], env_extra=env).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_oracle_verb():
    proc = _run_cli(["oracle"])
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "PASS" in proc.stdout
    assert "FAIL" not in proc.stdout


def test_parse_systems_helper():
    assert cli._parse_systems("wifi-baseline, static") == ["wifi-baseline", "static"]
    with pytest.raises(ValueError):
        cli._parse_systems(" , ")
    with pytest.raises(ValueError):
        cli._parse_systems("wifi")
