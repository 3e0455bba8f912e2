"""Comfort (MissTime) and energy aggregation, plus percent-savings arithmetic."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyInputError, GridMismatchError, ZeroBaselineError
from .stats import RateReport, pool_rates
from .thermal import SimResult
from .trace import OccupancyTrace


class ComfortMode(enum.Enum):
    BAND = "band"
    FIXED_POINT = "fixed_point"


@dataclass(frozen=True)
class ComfortConfig:
    """What counts as a comfortable indoor temperature while occupied.

    Band mode accepts anything between the occupied setpoints (padded by the
    tolerance); fixed-point mode demands a single preferred temperature and
    deliberately overestimates discomfort.
    """

    mode: ComfortMode = ComfortMode.BAND
    fixed_comfort_temp_c: float = 20.0
    tolerance_c: float = 0.5
    band_heat_c: float = 20.0
    band_cool_c: float = 24.0

    def __post_init__(self) -> None:
        if self.tolerance_c < 0:
            raise ConfigError("tolerance must be >= 0")
        if self.band_heat_c >= self.band_cool_c:
            raise ConfigError("comfort band must have heat below cool")
        if self.mode is ComfortMode.FIXED_POINT and not (
            self.band_heat_c <= self.fixed_comfort_temp_c <= self.band_cool_c
        ):
            raise ConfigError(
                f"fixed comfort temperature {self.fixed_comfort_temp_c} outside the "
                f"occupied band [{self.band_heat_c}, {self.band_cool_c}]"
            )


def comfortable_mask(indoor_temp_c: np.ndarray, cfg: ComfortConfig) -> np.ndarray:
    if cfg.mode is ComfortMode.FIXED_POINT:
        return np.abs(indoor_temp_c - cfg.fixed_comfort_temp_c) <= cfg.tolerance_c
    return (indoor_temp_c >= cfg.band_heat_c - cfg.tolerance_c) & (
        indoor_temp_c <= cfg.band_cool_c + cfg.tolerance_c
    )


def misstime(result: SimResult, truth: OccupancyTrace, cfg: ComfortConfig) -> float:
    """Average daily minutes the room was occupied but not comfortable.

    The denominator is every calendar day in the grid, occupied or not.
    """
    if result.grid != truth.grid:
        raise GridMismatchError("simulation result and truth are on different grids")
    missed = truth.occupied & ~comfortable_mask(result.indoor_temp_c, cfg)
    minutes = float(np.count_nonzero(missed)) * result.grid.step_minutes
    return minutes / result.grid.n_days()


@dataclass(frozen=True)
class RunLabel:
    """Identifies one simulated condition."""

    strategy: str  # predictive | reactive | static | always_on
    bounds: str
    seed: int
    fp_rate: float | None = None
    fn_rate: float | None = None

    @property
    def condition(self) -> str:
        if self.fp_rate is not None and self.fn_rate is not None:
            return (
                f"{self.strategy}_fp{self.fp_rate:g}_fn{self.fn_rate:g}_"
                f"{self.bounds}_seed{self.seed}"
            )
        return f"{self.strategy}_{self.bounds}_seed{self.seed}"


@dataclass(frozen=True)
class RoomRecord:
    """Everything a report needs from one room's run (also the raw-file schema)."""

    room_id: str
    monthly_energy_kwh: dict[str, float]
    misstime_daily_min: float
    occ_fraction: float
    rate: RateReport | None = None

    @property
    def energy_kwh(self) -> float:
        return float(sum(self.monthly_energy_kwh.values()))


@dataclass(frozen=True)
class RunMetrics:
    """Building-level aggregates for one condition."""

    label: RunLabel
    total_energy_kwh: float
    monthly_energy_kwh: dict[str, float]
    per_room_energy_kwh: dict[str, float]
    per_room_misstime: dict[str, float]
    misstime_avg_daily_min: float
    misstime_sd_daily_min: float
    misstime_pooled_daily_min: float
    room_rates: dict[str, RateReport] | None = None
    rates_pooled: RateReport | None = None
    accuracy_room_mean: float | None = None


def aggregate_records(label: RunLabel, records: list[RoomRecord]) -> RunMetrics:
    """Aggregate per-room records in sorted room order (reproducible bytes)."""
    if not records:
        raise EmptyInputError("no room records to aggregate")
    records = sorted(records, key=lambda r: r.room_id)
    per_room_energy = {r.room_id: r.energy_kwh for r in records}
    monthly: dict[str, float] = {}
    for r in records:
        for month, kwh in r.monthly_energy_kwh.items():
            monthly[month] = monthly.get(month, 0.0) + kwh
    monthly = dict(sorted(monthly.items()))

    mt = np.array([r.misstime_daily_min for r in records])
    # Rooms share one grid, so pooling minutes over room-days coincides with
    # the room mean; both are still reported separately downstream.
    pooled = float(mt.mean())

    reports = [r.rate for r in records if r.rate is not None]
    pooled_rates = pool_rates(reports) if reports else None
    acc_mean = float(np.mean([rep.accuracy for rep in reports])) if reports else None
    return RunMetrics(
        label=label,
        total_energy_kwh=float(sum(per_room_energy.values())),
        monthly_energy_kwh=monthly,
        per_room_energy_kwh=per_room_energy,
        per_room_misstime={r.room_id: r.misstime_daily_min for r in records},
        misstime_avg_daily_min=float(mt.mean()),
        misstime_sd_daily_min=float(mt.std()),
        misstime_pooled_daily_min=pooled,
        room_rates={r.room_id: r.rate for r in records if r.rate is not None} or None,
        rates_pooled=pooled_rates,
        accuracy_room_mean=acc_mean,
    )


def aggregate(
    label: RunLabel,
    results: list[SimResult],
    misstimes: dict[str, float],
    rates: dict[str, RateReport] | None = None,
    occ_fractions: dict[str, float] | None = None,
) -> RunMetrics:
    """Sum room energies, average room MissTimes (population SD across rooms)."""
    if not results:
        raise EmptyInputError("no simulation results to aggregate")
    records = [
        RoomRecord(
            room_id=r.room_id,
            monthly_energy_kwh=r.monthly_energy_kwh,
            misstime_daily_min=misstimes[r.room_id],
            occ_fraction=(occ_fractions or {}).get(r.room_id, float("nan")),
            rate=(rates or {}).get(r.room_id),
        )
        for r in results
    ]
    return aggregate_records(label, records)


def percent_savings(candidate_kwh: float, baseline_kwh: float) -> float:
    """100 * (baseline - candidate) / baseline; negative means candidate is worse."""
    if baseline_kwh <= 0:
        raise ZeroBaselineError(f"baseline energy must be positive, got {baseline_kwh}")
    return 100.0 * (baseline_kwh - candidate_kwh) / baseline_kwh
