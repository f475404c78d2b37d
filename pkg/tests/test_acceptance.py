"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines live. The
heavy criteria (4-8) drive the full Monte-Carlo engine at the preset snapshot
counts and take several minutes together.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from apdim import channel as ch
from apdim import engine, geometry, scenario, wifi, zf
from apdim.oracles import random_papc_instance

SEED = 20240601


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")


def _scn(preset: str, **engine_overrides):
    raw = scenario.preset_raw(preset)
    raw["engine"].update(engine_overrides)
    return scenario.from_dict(raw)


def _ladder_records(scn, system: str, n_snapshots: int, max_aps=None):
    records = []
    for rung, (nx, ny) in enumerate(geometry.grid_ladder(max_aps or scn.engine.ladder_max_aps)):
        layout = geometry.place_aps(scn.area, nx, ny)
        records.append(engine.evaluate_deployment(scn, layout, system, rung, n_snapshots))
    return records


def test_criterion_01_zf_inversion():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in (1, 2, 4, 8, 16):
        for _ in range(1000):
            h = ch.draw_fading(rng, (n, n))
            bf = zf.build_beamformer(h)
            worst = max(worst, float(np.abs(h @ bf.w - np.eye(n)).max()))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 10.0
    _report(1, "ZF inversion residual", ok, f"max |HW - I| = {worst:.2e}, {elapsed:.1f} s")
    assert worst < 1e-8
    assert elapsed < 10.0


def test_criterion_02_papc_solver_vs_grid_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 1)
    worst_rel = 0.0
    worst_load = 0.0
    for _ in range(200):
        inst = random_papc_instance(rng)
        worst_rel = max(
            worst_rel, abs(inst.solver_sum_rate - inst.grid_sum_rate) / inst.grid_sum_rate
        )
        worst_load = max(worst_load, inst.max_antenna_load / inst.pt_mw)
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 0.01 and worst_load <= 1 + 1e-6 and elapsed < 60.0
    _report(
        2,
        "PAPC solver vs 400x400 grid",
        ok,
        f"worst rel diff {worst_rel:.2e}, worst load/Pt {worst_load:.9f}, {elapsed:.1f} s",
    )
    assert worst_rel <= 0.01
    assert worst_load <= 1 + 1e-6
    assert elapsed < 60.0


def test_criterion_03_ssi_distribution():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 2)

    clique_adj = np.ones((3, 3), dtype=bool)
    np.fill_diagonal(clique_adj, False)
    clique = wifi.ContentionGraph(k=1, members=(np.arange(3),), adjacency=(clique_adj,))
    wins = np.zeros(3)
    for _ in range(10_000):
        act = wifi.sample_ssi(clique, rng)
        wifi.validate_active_set(clique, act)
        wins[act.all_active[0]] += 1
    clique_err = float(np.abs(wins / 10_000 - 1 / 3).max())

    path_adj = np.zeros((3, 3), dtype=bool)
    path_adj[0, 1] = path_adj[1, 0] = path_adj[1, 2] = path_adj[2, 1] = True
    path = wifi.ContentionGraph(k=1, members=(np.arange(3),), adjacency=(path_adj,))
    ends = 0
    for _ in range(10_000):
        act = wifi.sample_ssi(path, rng)
        wifi.validate_active_set(path, act)
        ends += act.all_active.size == 2
    path_err = abs(ends / 10_000 - 2 / 3)

    elapsed = time.perf_counter() - t0
    ok = clique_err <= 0.03 and path_err <= 0.03 and elapsed < 5.0
    _report(
        3,
        "SSI sampling vs enumeration",
        ok,
        f"clique max err {clique_err:.4f}, path err {path_err:.4f}, {elapsed:.1f} s",
    )
    assert clique_err <= 0.03
    assert path_err <= 0.03
    assert elapsed < 5.0


def test_criterion_04_open_env_wifi_saturation():
    t0 = time.perf_counter()
    scn = _scn("table1-open", seed=SEED)
    records = _ladder_records(scn, "wifi-baseline", n_snapshots=500, max_aps=100)
    ceiling = 16_200.0  # 3 active APs x 54 Mbps / 0.01 km2
    ceiling_demand = engine.throughput_to_demand(ceiling / scn.traffic.lambda_u_per_km2, scn.traffic)
    flat = [r for r in records if r.ap_count >= 3]
    worst_dev = max(abs(r.lambda_s.mean - ceiling) / ceiling for r in flat)
    worst_demand_dev = max(
        abs(r.demand_gb_month - ceiling_demand) / ceiling_demand for r in flat
    )
    elapsed = time.perf_counter() - t0
    ok = worst_dev <= 0.02 and worst_demand_dev <= 0.02 and abs(ceiling_demand - 10.7) < 0.05
    _report(
        4,
        "open-env Wi-Fi saturation",
        ok,
        f"worst deviation from 16200 Mbps/km2: {worst_dev * 100:.2f}%, "
        f"ceiling D = {ceiling_demand:.2f} GB/month/user (worst dev "
        f"{worst_demand_dev * 100:.2f}%), {elapsed:.0f} s",
    )
    assert worst_dev <= 0.02, [(r.ap_count, r.lambda_s.mean) for r in flat]
    assert ceiling_demand == pytest.approx(10.7, abs=0.05)
    assert worst_demand_dev <= 0.02


def test_criterion_05_aggressive_wifi_outage_trend():
    # Collisions need a co-channel pair, so the trend window starts once the
    # ladder exceeds K^wifi APs; the collision peak must sit at moderate
    # density and the curve must not rise significantly beyond it (the W knob
    # shifts where contention sets in, so this is a shape test, not absolute).
    t0 = time.perf_counter()
    scn = _scn("table1-open", seed=SEED)
    records = _ladder_records(scn, "wifi-aggressive", n_snapshots=500, max_aps=100)
    contended = [r for r in records if r.ap_count > scn.wifi.k_wifi]
    peak_idx = int(np.argmax([r.outage.mean for r in contended]))
    peak = contended[peak_idx]
    violations = [
        (a.ap_count, b.ap_count)
        for a, b in zip(contended[peak_idx:], contended[peak_idx + 1 :])
        if b.outage.ci_low > a.outage.ci_high  # significant increase
    ]
    final = records[-1]
    declined = peak.outage.ci_low > final.outage.ci_high  # densification really helps
    ok = declined and not violations and final.outage.ci_high < scn.radio.beta
    _report(
        5,
        "aggressive Wi-Fi outage trend",
        ok,
        f"peak nu {peak.outage.mean:.4f} at {peak.ap_count} APs, significant "
        f"decline to max density: {declined}, significant rises past peak: "
        f"{violations}, final nu {final.outage.mean:.4f} "
        f"[hi {final.outage.ci_high:.4f}] < beta, {time.perf_counter() - t0:.0f} s",
    )
    assert declined, (peak.outage, final.outage)
    assert not violations
    assert final.outage.ci_high < scn.radio.beta


def test_criterion_06_erroneous_zf_outage_growth():
    t0 = time.perf_counter()
    scn = _scn("table1-open", seed=SEED)
    err = _ladder_records(scn, "zf-erroneous", n_snapshots=500, max_aps=64)
    ideal = _ladder_records(scn, "zf-ideal", n_snapshots=500, max_aps=64)
    beta = scn.radio.beta
    exceeds = [r for r in err if r.ap_count <= 25 and r.outage.ci_low > beta]
    drops = [
        (a.ap_count, b.ap_count)
        for a, b in zip(err, err[1:])
        if b.outage.ci_high < a.outage.ci_low  # significant decrease
    ]
    ideal_max = max(r.outage.mean for r in ideal)
    ok = bool(exceeds) and not drops and ideal_max <= 0.005
    _report(
        6,
        "erroneous-ZF outage growth",
        ok,
        f"first rung with nu significantly > beta: "
        f"{exceeds[0].ap_count if exceeds else 'none'} APs, "
        f"significant drops along ladder: {drops}, "
        f"max ideal-ZF nu {ideal_max:.5f}, nu at 64 APs {err[-1].outage.mean:.3f}, "
        f"{time.perf_counter() - t0:.0f} s",
    )
    assert exceeds, [(r.ap_count, r.outage.mean) for r in err]
    assert not drops
    assert ideal_max <= 0.005


def test_criterion_07_environment_dependent_coordination_gain():
    # Matched high demand point: 25 GB/month/user, ~2.3x the open-env Wi-Fi
    # ceiling and within the static system's open-env spectrum wall (the
    # paper's absolute 40 GB point is not reproducible without its W).
    t0 = time.perf_counter()
    demand = 25.0
    mins = {}
    for preset in ("table1-open", "table1-obstructed"):
        raw = scenario.preset_raw(preset)
        raw["engine"].update(n_snapshots=200, ladder_max_aps=64, seed=SEED)
        raw["demand_gb_month"] = [demand]
        scn = scenario.from_dict(raw)
        res = engine.dimension(scn, ["static", "zf-ideal"])
        for system in ("static", "zf-ideal"):
            rec = res.per_system[system].minimums[demand]
            mins[(preset, system)] = None if rec is None else rec.ap_count
    feasible = all(v is not None for v in mins.values())
    if feasible:
        ratio_open = mins[("table1-open", "static")] / mins[("table1-open", "zf-ideal")]
        ratio_obstructed = (
            mins[("table1-obstructed", "static")] / mins[("table1-obstructed", "zf-ideal")]
        )
        separation = ratio_open / ratio_obstructed
    else:
        ratio_open = ratio_obstructed = separation = float("nan")
    ok = feasible and separation >= 3.0
    _report(
        7,
        "environment-dependent coordination gain",
        ok,
        f"min APs {mins}, open ratio {ratio_open:.2f}, obstructed ratio "
        f"{ratio_obstructed:.2f}, separation {separation:.1f}x, "
        f"{time.perf_counter() - t0:.0f} s",
    )
    assert feasible, mins
    assert separation >= 3.0


def test_criterion_08_obstructed_wifi_knee():
    t0 = time.perf_counter()
    scn = _scn("table1-obstructed", seed=SEED)
    records = _ladder_records(scn, "wifi-baseline", n_snapshots=500, max_aps=100)
    by_count = {r.ap_count: r.demand_gb_month for r in records}
    upto_25 = [by_count[c] for c in sorted(c for c in by_count if c <= 25)]
    grows_to_one_per_room = all(b > a for a, b in zip(upto_25, upto_25[1:]))
    gain_25_49 = (by_count[49] - by_count[25]) / by_count[25]
    gain_49_100 = (by_count[100] - by_count[49]) / by_count[49]
    ok = grows_to_one_per_room and gain_25_49 < 0.05 and gain_49_100 < 0.05
    _report(
        8,
        "obstructed-env Wi-Fi knee",
        ok,
        f"D grows up to 25 APs: {grows_to_one_per_room} "
        f"(D(25)={by_count[25]:.1f}), doubling gains beyond: "
        f"25->49 {gain_25_49 * 100:+.1f}%, 49->100 {gain_49_100 * 100:+.1f}% "
        f"(criterion bound < 5%), {time.perf_counter() - t0:.0f} s",
    )
    assert grows_to_one_per_room, upto_25
    # Beyond one AP per room the criterion bounds the capacity gain per AP
    # doubling at 5%. With K^wifi = 3 non-overlapping channels a room can host
    # up to three concurrently active APs, so random sequential packing keeps
    # finding extra transmitters well past 25 APs; see the analysis note in
    # the repo-external decisions ledger if these assertions fail.
    assert gain_25_49 < 0.05, f"gain 25->49 APs = {gain_25_49:.3f}"
    assert gain_49_100 < 0.05, f"gain 49->100 APs = {gain_49_100:.3f}"


def test_criterion_09_determinism_across_threads(tmp_path):
    t0 = time.perf_counter()
    env = {
        "APDIM_DEMAND_GB_MONTH": "[1.0, 4.0]",
        "APDIM_ENGINE__LADDER_MAX_APS": "9",
        "APDIM_ENGINE__N_SNAPSHOTS": "60",
    }
    outputs = []
    for threads in ("1", "4"):
        out = tmp_path / f"threads_{threads}.csv"
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "apdim.cli",
                "run",
                "--preset",
                "table1-open",
                "--systems",
                "wifi-baseline,static,zf-ideal,zf-erroneous",
                "--out",
                str(out),
                "--seed",
                str(SEED),
                "--threads",
                threads,
                "--quiet",
            ],
            capture_output=True,
            text=True,
            env={**dict(__import__("os").environ), **env},
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1]
    _report(
        9,
        "thread-count determinism",
        ok,
        f"1 vs 4 threads byte-identical CSV: {ok}, {time.perf_counter() - t0:.0f} s",
    )
    assert ok


def test_criterion_10_wilson_calibration():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    trials = 1000
    covered = 0
    for i in range(trials):
        q = (0.02, 0.05, 0.10, 0.30)[i % 4]
        flags = rng.random(500) < q
        est = engine.wilson_estimate(int(flags.sum()), 500)
        covered += est.ci_low <= q <= est.ci_high
    coverage = covered / trials
    ok = coverage >= 0.93
    _report(
        10,
        "Wilson interval calibration",
        ok,
        f"coverage {coverage * 100:.1f}% over {trials} Bernoulli streams, "
        f"{time.perf_counter() - t0:.1f} s",
    )
    assert coverage >= 0.93
