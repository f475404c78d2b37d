"""Scenario configuration: JSON schema, strict validation, and named presets.

A scenario file must be complete; nothing is defaulted silently. The named
presets carry the standard indoor parameter set (100 m x 100 m area, omega 0.2,
1e5 users/km2, 100 mW APs, 3 dB SINR threshold, 5% outage budget, 3 Wi-Fi
channels) in its open and obstructed propagation variants. The total system
bandwidth is a knob; the presets use 60 MHz so each Wi-Fi channel is 20 MHz.
"""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import asdict, dataclass

from .channel import PropagationParams, noise_power_mw
from .engine import TrafficParams
from .geometry import ServiceArea

ENV_PREFIX = "APDIM_"


class ScenarioError(ValueError):
    """Configuration parse or schema violation, with the offending key path."""


@dataclass(frozen=True)
class RadioConfig:
    bandwidth_mhz: float
    pt_mw: float
    gamma_t_db: float
    beta: float
    boltzmann_j_per_k: float
    temperature_k: float
    sigma_z2: float


@dataclass(frozen=True)
class WifiConfig:
    cs_thr_baseline_dbm: float
    cs_thr_aggressive_dbm: float
    k_wifi: int
    eta_wifi: float


@dataclass(frozen=True)
class StaticConfig:
    eta_sta: float
    k_max: int


@dataclass(frozen=True)
class ZfConfig:
    eta_zf: float
    delta: float
    rho: float


@dataclass(frozen=True)
class EngineConfig:
    n_snapshots: int
    seed: int
    ladder_max_aps: int


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    area: ServiceArea
    propagation: PropagationParams
    traffic: TrafficParams
    radio: RadioConfig
    wifi: WifiConfig
    static: StaticConfig
    zf: ZfConfig
    engine: EngineConfig
    demand_gb_month: tuple[float, ...]

    @property
    def sigma2_mw(self) -> float:
        """Thermal noise power over the whole system bandwidth, mW."""
        return noise_power_mw(
            self.radio.boltzmann_j_per_k, self.radio.temperature_k, self.radio.bandwidth_mhz * 1e6
        )

    @property
    def gamma_t_linear(self) -> float:
        return 10.0 ** (self.radio.gamma_t_db / 10.0)

    @property
    def n_users(self) -> int:
        """Users dropped per snapshot: round(E[lambda_u] * |area|)."""
        return max(1, round(self.traffic.lambda_u_per_km2 * self.area.area_km2))

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "area": {
                "lx_m": self.area.lx,
                "ly_m": self.area.ly,
                "wx": self.area.wx,
                "wy": self.area.wy,
            },
            "propagation": {
                "l0_db": self.propagation.l0_db,
                "alpha": self.propagation.alpha,
                "lw_db": self.propagation.lw_db,
            },
            "traffic": {
                "omega": self.traffic.omega,
                "lambda_u_per_km2": self.traffic.lambda_u_per_km2,
            },
            "radio": asdict(self.radio),
            "wifi": asdict(self.wifi),
            "static": asdict(self.static),
            "zf": asdict(self.zf),
            "engine": asdict(self.engine),
            "demand_gb_month": list(self.demand_gb_month),
        }


# --- schema -----------------------------------------------------------------

def _num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


_CHECKS = {
    "string": (lambda v: isinstance(v, str) and v != "", "non-empty string"),
    "number": (_num, "finite number"),
    "positive": (lambda v: _num(v) and v > 0, "positive number"),
    "nonneg": (lambda v: _num(v) and v >= 0, "number >= 0"),
    "fraction01": (lambda v: _num(v) and 0 < v < 1, "number in (0, 1)"),
    "fraction01c": (lambda v: _num(v) and 0 <= v <= 1, "number in [0, 1]"),
    "omega": (lambda v: _num(v) and 0 < v <= 1, "number in (0, 1]"),
    "nonneg_int": (lambda v: _int(v) and v >= 0, "integer >= 0"),
    "positive_int": (lambda v: _int(v) and v >= 1, "integer >= 1"),
    "seed": (lambda v: _int(v) and 0 <= v < 2**64, "integer in [0, 2^64)"),
}

_SCHEMA = {
    "scenario_id": "string",
    "area": {"lx_m": "positive", "ly_m": "positive", "wx": "nonneg_int", "wy": "nonneg_int"},
    "propagation": {"l0_db": "number", "alpha": "nonneg", "lw_db": "nonneg"},
    "traffic": {"omega": "omega", "lambda_u_per_km2": "positive"},
    "radio": {
        "bandwidth_mhz": "positive",
        "pt_mw": "positive",
        "gamma_t_db": "number",
        "beta": "fraction01",
        "boltzmann_j_per_k": "positive",
        "temperature_k": "positive",
        "sigma_z2": "positive",
    },
    "wifi": {
        "cs_thr_baseline_dbm": "number",
        "cs_thr_aggressive_dbm": "number",
        "k_wifi": "positive_int",
        "eta_wifi": "positive",
    },
    "static": {"eta_sta": "positive", "k_max": "positive_int"},
    "zf": {"eta_zf": "positive", "delta": "fraction01c", "rho": "fraction01c"},
    "engine": {"n_snapshots": "positive_int", "seed": "seed", "ladder_max_aps": "positive_int"},
    "demand_gb_month": "demand_grid",
}


def _fail(path: str, expected: str, got) -> ScenarioError:
    return ScenarioError(f"{path}: expected {expected}, got {got!r}")


def validate_raw(raw: dict) -> None:
    """Schema-check a raw scenario dict; raises ScenarioError naming the key."""
    if not isinstance(raw, dict):
        raise _fail("scenario", "a JSON object", type(raw).__name__)
    unknown = set(raw) - set(_SCHEMA)
    if unknown:
        raise ScenarioError(f"unknown key(s): {', '.join(sorted(unknown))}")
    missing = set(_SCHEMA) - set(raw)
    if missing:
        raise ScenarioError(f"missing key(s): {', '.join(sorted(missing))}")
    for key, spec in _SCHEMA.items():
        value = raw[key]
        if isinstance(spec, dict):
            if not isinstance(value, dict):
                raise _fail(key, "a JSON object", value)
            unknown = set(value) - set(spec)
            if unknown:
                raise ScenarioError(f"{key}: unknown key(s): {', '.join(sorted(unknown))}")
            missing = set(spec) - set(value)
            if missing:
                raise ScenarioError(f"{key}: missing key(s): {', '.join(sorted(missing))}")
            for sub, kind in spec.items():
                check, label = _CHECKS[kind]
                if not check(value[sub]):
                    raise _fail(f"{key}.{sub}", label, value[sub])
        elif spec == "demand_grid":
            ok = (
                isinstance(value, list)
                and len(value) >= 1
                and all(_num(v) and v > 0 for v in value)
                and all(b >= a for a, b in zip(value, value[1:]))
            )
            if not ok:
                raise _fail(key, "ascending list of positive numbers", value)
        else:
            check, label = _CHECKS[spec]
            if not check(value):
                raise _fail(key, label, value)


def from_dict(raw: dict) -> Scenario:
    """Build a validated Scenario from a raw dict (no defaults applied)."""
    validate_raw(raw)
    return Scenario(
        scenario_id=raw["scenario_id"],
        area=ServiceArea(
            lx=float(raw["area"]["lx_m"]),
            ly=float(raw["area"]["ly_m"]),
            wx=raw["area"]["wx"],
            wy=raw["area"]["wy"],
        ),
        propagation=PropagationParams(
            l0_db=float(raw["propagation"]["l0_db"]),
            alpha=float(raw["propagation"]["alpha"]),
            lw_db=float(raw["propagation"]["lw_db"]),
        ),
        traffic=TrafficParams(
            omega=float(raw["traffic"]["omega"]),
            lambda_u_per_km2=float(raw["traffic"]["lambda_u_per_km2"]),
        ),
        radio=RadioConfig(**{k: float(v) for k, v in raw["radio"].items()}),
        wifi=WifiConfig(
            cs_thr_baseline_dbm=float(raw["wifi"]["cs_thr_baseline_dbm"]),
            cs_thr_aggressive_dbm=float(raw["wifi"]["cs_thr_aggressive_dbm"]),
            k_wifi=raw["wifi"]["k_wifi"],
            eta_wifi=float(raw["wifi"]["eta_wifi"]),
        ),
        static=StaticConfig(eta_sta=float(raw["static"]["eta_sta"]), k_max=raw["static"]["k_max"]),
        zf=ZfConfig(
            eta_zf=float(raw["zf"]["eta_zf"]),
            delta=float(raw["zf"]["delta"]),
            rho=float(raw["zf"]["rho"]),
        ),
        engine=EngineConfig(
            n_snapshots=raw["engine"]["n_snapshots"],
            seed=raw["engine"]["seed"],
            ladder_max_aps=raw["engine"]["ladder_max_aps"],
        ),
        demand_gb_month=tuple(float(v) for v in raw["demand_gb_month"]),
    )


def apply_env_overrides(raw: dict, environ=None) -> dict:
    """Apply APDIM_SECTION__KEY (or APDIM_KEY) environment overrides to a raw dict.

    Values are parsed as JSON literals, falling back to the raw string. Only
    keys already present in the scenario can be overridden; anything else is a
    ScenarioError, so typos fail loudly in CI.
    """
    environ = os.environ if environ is None else environ
    raw = copy.deepcopy(raw)
    for name, text in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        path = name[len(ENV_PREFIX):].lower().split("__")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        for part in path[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ScenarioError(f"env override {name}: no such key {'.'.join(path)}")
            node = node[part]
        if not isinstance(node, dict) or path[-1] not in node:
            raise ScenarioError(f"env override {name}: no such key {'.'.join(path)}")
        node[path[-1]] = value
    return raw


def load_scenario(path: str, use_env: bool = True) -> Scenario:
    """Load, override from the environment, and validate a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    if use_env:
        raw = apply_env_overrides(raw)
    return from_dict(raw)


# --- presets -----------------------------------------------------------------

_BASE_PRESET = {
    "area": {"lx_m": 100.0, "ly_m": 100.0, "wx": 0, "wy": 0},
    "propagation": {"l0_db": 37.0, "alpha": 2.0, "lw_db": 0.0},
    "traffic": {"omega": 0.2, "lambda_u_per_km2": 1.0e5},
    "radio": {
        "bandwidth_mhz": 60.0,
        "pt_mw": 100.0,
        "gamma_t_db": 3.0,
        "beta": 0.05,
        "boltzmann_j_per_k": 1.38e-23,
        "temperature_k": 300.0,
        "sigma_z2": 1.0,
    },
    "wifi": {
        "cs_thr_baseline_dbm": -85.0,
        "cs_thr_aggressive_dbm": -65.0,
        "k_wifi": 3,
        "eta_wifi": 2.7,
    },
    "static": {"eta_sta": 3.75, "k_max": 12},
    "zf": {"eta_zf": 3.75, "delta": 0.02, "rho": 0.9},
    "engine": {"n_snapshots": 500, "seed": 20240601, "ladder_max_aps": 100},
    "demand_gb_month": [1.0, 2.0, 5.0, 10.0, 20.0, 40.0],
}


def _preset_raws() -> dict:
    open_env = copy.deepcopy(_BASE_PRESET)
    open_env["scenario_id"] = "table1-open"

    obstructed = copy.deepcopy(_BASE_PRESET)
    obstructed["scenario_id"] = "table1-obstructed"
    obstructed["area"].update(wx=4, wy=4)  # 25 rooms
    obstructed["propagation"].update(alpha=4.0, lw_db=10.0)
    return {"table1-open": open_env, "table1-obstructed": obstructed}


PRESET_NAMES = tuple(sorted(_preset_raws()))


def preset_raw(name: str) -> dict:
    raws = _preset_raws()
    if name not in raws:
        raise ScenarioError(f"unknown preset {name!r}; available: {', '.join(sorted(raws))}")
    return raws[name]


def preset(name: str, use_env: bool = True) -> Scenario:
    raw = preset_raw(name)
    if use_env:
        raw = apply_env_overrides(raw)
    return from_dict(raw)
