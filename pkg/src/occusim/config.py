"""Declarative TOML configuration for the CLI (documented in README)."""

from __future__ import annotations

import sys
from datetime import datetime
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .control import BoundsPolicy, standard_bounds
from .errors import ConfigError
from .metrics import ComfortConfig, ComfortMode
from .harness import SweepSpec
from .thermal import DegreeMinutesParams, RoomThermalParams
from .trace import (
    WEATHER_PRESETS,
    SynthOccupancyConfig,
    WeatherSeries,
    synth_weather,
    university_office_preset,
)


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _section(cfg: dict, name: str, allowed: set[str]) -> dict:
    section = cfg.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"[{name}]: unknown keys {sorted(unknown)}")
    return section


_OCCUPANCY_KEYS = {
    "preset", "n_rooms", "n_days", "start", "step_minutes",
    "mean_arrival_minute", "arrival_spread_minutes",
    "mean_departure_minute", "departure_spread_minutes",
    "weekday_presence_prob", "weekend_presence_prob",
    "lunch_gap_prob", "lunch_gap_minutes",
    "target_mean_occupancy", "room_spread", "seed",
}


def occupancy_config(cfg: dict, seed: int | None = None) -> SynthOccupancyConfig:
    sec = dict(_section(cfg, "occupancy", _OCCUPANCY_KEYS))
    preset = sec.pop("preset", "university_office")
    if seed is not None:
        sec["seed"] = seed
    start = sec.get("start")
    if start is not None and not isinstance(start, datetime):
        raise ConfigError("[occupancy] start must be a TOML datetime")
    if preset == "university_office":
        base = university_office_preset()
        merged = {**base.__dict__, **sec}
        return SynthOccupancyConfig(**merged)
    if preset == "custom":
        return SynthOccupancyConfig(**sec)
    raise ConfigError(f"[occupancy] unknown preset {preset!r}")


_WEATHER_KEYS = {
    "preset", "n_days", "start", "step_minutes", "annual_mean_c", "annual_amplitude_c",
    "peak_yearday", "diurnal_amplitude_c", "noise_amplitude_c", "seed",
}


def make_weather(cfg: dict, occ: SynthOccupancyConfig, seed: int | None = None) -> WeatherSeries:
    sec = dict(_section(cfg, "weather", _WEATHER_KEYS))
    preset = sec.pop("preset", "winter")
    if preset in WEATHER_PRESETS:
        p = WEATHER_PRESETS[preset]
        mean, amp = p["annual_mean_c"], p["annual_amplitude_c"]
        diurnal, noise = p["diurnal_amplitude_c"], p["noise_amplitude_c"]
    elif preset == "custom":
        mean, amp, diurnal, noise = 10.0, 12.0, 5.0, 0.0
    else:
        raise ConfigError(f"[weather] unknown preset {preset!r}")
    return synth_weather(
        sec.get("start", occ.start),
        int(sec.get("n_days", occ.n_days)),
        annual_mean_c=float(sec.get("annual_mean_c", mean)),
        annual_amplitude_c=float(sec.get("annual_amplitude_c", amp)),
        peak_yearday=int(sec.get("peak_yearday", 201)),
        diurnal_amplitude_c=float(sec.get("diurnal_amplitude_c", diurnal)),
        noise_amplitude_c=float(sec.get("noise_amplitude_c", noise)),
        step_minutes=int(sec.get("step_minutes", occ.step_minutes)),
        seed=int(sec.get("seed", seed if seed is not None else occ.seed)),
    )


_BOUNDS_KEYS = {"setback_delta_c", "occupied_heat_sp_c", "occupied_cool_sp_c"}


def bounds_catalog(cfg: dict) -> dict[str, BoundsPolicy]:
    catalog = standard_bounds()
    for name, override in cfg.get("bounds", {}).items():
        if not isinstance(override, dict):
            raise ConfigError("[bounds] entries must be tables, e.g. [bounds.large]")
        unknown = set(override) - _BOUNDS_KEYS
        if unknown:
            raise ConfigError(f"[bounds.{name}]: unknown keys {sorted(unknown)}")
        base = catalog.get(name)
        catalog[name] = BoundsPolicy(
            name=name,
            setback_delta_c=float(override.get(
                "setback_delta_c", base.setback_delta_c if base else 2.0)),
            occupied_heat_sp_c=float(override.get(
                "occupied_heat_sp_c", base.occupied_heat_sp_c if base else 20.0)),
            occupied_cool_sp_c=float(override.get(
                "occupied_cool_sp_c", base.occupied_cool_sp_c if base else 24.0)),
        )
    return catalog


_COMFORT_KEYS = {"mode", "fixed_comfort_temp_c", "tolerance_c"}


def comfort_config(cfg: dict) -> ComfortConfig:
    sec = _section(cfg, "comfort", _COMFORT_KEYS)
    mode_raw = sec.get("mode", "band")
    try:
        mode = ComfortMode(mode_raw)
    except ValueError as exc:
        raise ConfigError(f"[comfort] unknown mode {mode_raw!r}") from exc
    return ComfortConfig(
        mode=mode,
        fixed_comfort_temp_c=float(sec.get("fixed_comfort_temp_c", 20.0)),
        tolerance_c=float(sec.get("tolerance_c", 0.5)),
    )


_THERMAL_KEYS = {
    "thermal_resistance_k_per_w", "thermal_capacitance_j_per_k", "heat_capacity_w",
    "cool_capacity_w", "cop_heat", "cop_cool", "initial_temp_c",
}


def thermal_params(cfg: dict) -> RoomThermalParams:
    sec = _section(cfg, "thermal", _THERMAL_KEYS)
    return RoomThermalParams(**{k: float(v) for k, v in sec.items()})


_PROXY_KEYS = {"ua_w_per_k", "cop_heat", "cop_cool"}


def proxy_params(cfg: dict) -> DegreeMinutesParams:
    sec = _section(cfg, "degree_minutes", _PROXY_KEYS)
    return DegreeMinutesParams(**{k: float(v) for k, v in sec.items()})


_PREDICTOR_KEYS = {"lookahead_minutes", "cluster_min_minutes", "cluster_max_minutes"}
_SWEEP_KEYS = {"fp_rates", "fn_rates", "bounds", "backend", "seeds"}
_STATIC_KEYS = {"window_start_minute", "window_end_minute"}


def sweep_spec(cfg: dict, seeds_override: list[int] | None = None) -> SweepSpec:
    pred = _section(cfg, "predictor", _PREDICTOR_KEYS)
    sweep = _section(cfg, "sweep", _SWEEP_KEYS)
    static = _section(cfg, "static", _STATIC_KEYS)
    seeds = seeds_override if seeds_override is not None else sweep.get("seeds", [7])
    return SweepSpec(
        fp_rates=tuple(float(x) for x in sweep.get("fp_rates", (0.25, 0.15, 0.05))),
        fn_rates=tuple(float(x) for x in sweep.get("fn_rates", (0.25, 0.15, 0.05))),
        bounds_names=tuple(sweep.get("bounds", ("small", "medium", "large"))),
        lookahead_minutes=int(pred.get("lookahead_minutes", 60)),
        cluster_min_minutes=int(pred.get("cluster_min_minutes", 5)),
        cluster_max_minutes=int(pred.get("cluster_max_minutes", 60)),
        static_window=(
            int(static.get("window_start_minute", 360)),
            int(static.get("window_end_minute", 1260)),
        ),
        seeds=tuple(int(s) for s in seeds),
        backend=sweep.get("backend", "rc"),
        comfort=comfort_config(cfg),
        bounds_catalog=bounds_catalog(cfg),
    )
