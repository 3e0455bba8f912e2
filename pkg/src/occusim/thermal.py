"""Energy backends: first-order RC room model (default) and a degree-minutes proxy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import rc_thermostat_steps
from .control import SetpointSchedule
from .errors import ConfigError, UnstableStepError
from .trace import TimeGrid, WeatherSeries, require_same_grid

J_PER_KWH = 3.6e6


@dataclass(frozen=True)
class RoomThermalParams:
    """Lumped room parameters for the RC backend.

    Defaults are order-of-magnitude office values: time constant R*C of about
    11 hours, and a plant sized so recovery even from the deepest standard
    setback (10 C) completes within a 60-minute pre-conditioning window while
    still saturating the capacity during recovery.
    """

    thermal_resistance_k_per_w: float = 0.02
    thermal_capacitance_j_per_k: float = 2.0e6
    heat_capacity_w: float = 8000.0
    cool_capacity_w: float = 8000.0
    cop_heat: float = 1.0
    cop_cool: float = 3.0
    initial_temp_c: float = 20.0

    def __post_init__(self) -> None:
        if self.thermal_resistance_k_per_w <= 0 or self.thermal_capacitance_j_per_k <= 0:
            raise ConfigError("thermal resistance and capacitance must be positive")
        if self.heat_capacity_w < 0 or self.cool_capacity_w < 0:
            raise ConfigError("plant capacities must be non-negative")
        if self.cop_heat <= 0 or self.cop_cool <= 0:
            raise ConfigError("COPs must be positive")

    @property
    def time_constant_s(self) -> float:
        return self.thermal_resistance_k_per_w * self.thermal_capacitance_j_per_k


@dataclass(frozen=True)
class DegreeMinutesParams:
    """Envelope conductance and plant efficiencies for the proxy backend."""

    ua_w_per_k: float = 50.0
    cop_heat: float = 1.0
    cop_cool: float = 3.0

    def __post_init__(self) -> None:
        if self.ua_w_per_k <= 0 or self.cop_heat <= 0 or self.cop_cool <= 0:
            raise ConfigError("ua_w_per_k and COPs must be positive")


@dataclass(frozen=True, eq=False)
class SimResult:
    """Per-room simulation output: temperatures, thermal power, energy."""

    room_id: str
    grid: TimeGrid
    indoor_temp_c: np.ndarray
    hvac_thermal_w: np.ndarray  # +heating / -cooling
    electrical_energy_kwh_per_step: np.ndarray
    monthly_energy_kwh: dict[str, float]
    final_temp_c: float
    backend: str = "rc"

    @property
    def total_energy_kwh(self) -> float:
        return float(self.electrical_energy_kwh_per_step.sum())


def _monthly_totals(grid, kwh_per_step: np.ndarray) -> dict[str, float]:
    months = grid.months()
    keys, codes = np.unique(months, return_inverse=True)
    sums = np.bincount(codes, weights=kwh_per_step, minlength=len(keys))
    return {str(k): float(s) for k, s in zip(keys, sums)}


def _electrical_kwh(q_thermal_w: np.ndarray, dt_s: float, cop_heat: float,
                    cop_cool: float) -> np.ndarray:
    heat = np.where(q_thermal_w > 0, q_thermal_w, 0.0)
    cool = np.where(q_thermal_w < 0, -q_thermal_w, 0.0)
    return (heat / cop_heat + cool / cop_cool) * dt_s / J_PER_KWH


def simulate_room(
    schedule: SetpointSchedule,
    weather: WeatherSeries,
    params: RoomThermalParams,
) -> SimResult:
    """Integrate the RC room model under an ideal bounded-capacity thermostat."""
    grid = require_same_grid(schedule.grid, weather.grid)
    dt = grid.step_seconds
    if dt >= params.time_constant_s:
        raise UnstableStepError(
            f"step of {dt:.0f} s >= time constant {params.time_constant_s:.0f} s; "
            "explicit integration would be unstable"
        )
    temps, q, t_final = rc_thermostat_steps(
        weather.outdoor_temp_c,
        schedule.heat_sp_c,
        schedule.cool_sp_c,
        dt,
        params.thermal_resistance_k_per_w,
        params.thermal_capacitance_j_per_k,
        params.heat_capacity_w,
        params.cool_capacity_w,
        params.initial_temp_c,
    )
    kwh = _electrical_kwh(q, dt, params.cop_heat, params.cop_cool)
    return SimResult(
        room_id=schedule.room_id,
        grid=grid,
        indoor_temp_c=temps,
        hvac_thermal_w=q,
        electrical_energy_kwh_per_step=kwh,
        monthly_energy_kwh=_monthly_totals(grid, kwh),
        final_temp_c=float(t_final),
        backend="rc",
    )


def degree_minutes_energy(
    schedule: SetpointSchedule,
    weather: WeatherSeries,
    params: DegreeMinutesParams,
) -> SimResult:
    """Steady-state degree-minutes proxy: load proportional to setpoint-to-outdoor gap.

    No thermal mass: each step's heating load is ua * max(0, heat_sp - t_out)
    and cooling load ua * max(0, t_out - cool_sp) at that step's active
    setpoints. Indoor temperature is reported as the tracked setpoint
    (outdoor temperature clipped into the active band).
    """
    grid = require_same_grid(schedule.grid, weather.grid)
    dt = grid.step_seconds
    t_out = weather.outdoor_temp_c
    heat_w = params.ua_w_per_k * np.maximum(0.0, schedule.heat_sp_c - t_out)
    cool_w = params.ua_w_per_k * np.maximum(0.0, t_out - schedule.cool_sp_c)
    q = heat_w - cool_w
    kwh = (heat_w / params.cop_heat + cool_w / params.cop_cool) * dt / J_PER_KWH
    temps = np.clip(t_out, schedule.heat_sp_c, schedule.cool_sp_c)
    return SimResult(
        room_id=schedule.room_id,
        grid=grid,
        indoor_temp_c=temps,
        hvac_thermal_w=q,
        electrical_energy_kwh_per_step=kwh,
        monthly_energy_kwh=_monthly_totals(grid, kwh),
        final_temp_c=float(temps[-1]),
        backend="degree_minutes",
    )


def save_thermal_trace(result: SimResult, weather: WeatherSeries, path) -> None:
    """Per-step CSV dump of one room's run: outdoor/indoor temps, power, energy."""
    from pathlib import Path

    grid = require_same_grid(result.grid, weather.grid)
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("timestamp,t_out_c,t_in_c,hvac_thermal_w,kwh_step\n")
        for ts, t_out, t_in, q, kwh in zip(
            grid.timestamps(),
            weather.outdoor_temp_c,
            result.indoor_temp_c,
            result.hvac_thermal_w,
            result.electrical_energy_kwh_per_step,
        ):
            fh.write(f"{ts.isoformat()},{float(t_out)!r},{float(t_in)!r},{float(q)!r},{float(kwh)!r}\n")


def energy_conservation_check(
    result: SimResult,
    weather: WeatherSeries,
    params: RoomThermalParams,
) -> float:
    """First-law residual of an RC run (dimensionless; ~1e-12 for valid runs).

    Compares stored-energy change C*(T_end - T_start) against the integrated
    envelope and HVAC fluxes. The denominator is the larger of the two flux
    integrals so free-response runs (zero HVAC) still normalize sensibly.
    """
    grid = require_same_grid(result.grid, weather.grid)
    dt = grid.step_seconds
    r = params.thermal_resistance_k_per_w
    c = params.thermal_capacitance_j_per_k
    flux = (weather.outdoor_temp_c - result.indoor_temp_c) / r
    lhs = c * (result.final_temp_c - float(result.indoor_temp_c[0]))
    rhs = float(np.sum((result.hvac_thermal_w + flux) * dt))
    denom = max(
        float(np.sum(np.abs(result.hvac_thermal_w)) * dt),
        float(np.sum(np.abs(flux)) * dt),
        1.0,
    )
    return abs(lhs - rhs) / denom
