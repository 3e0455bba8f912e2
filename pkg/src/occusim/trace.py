"""Binary occupancy traces and outdoor temperature series on a shared time grid.

Everything downstream (prediction, control, thermal simulation, metrics)
operates on series attached to one :class:`TimeGrid`; mixing grids is rejected
up front. Timestamps are naive local wall-clock times at minute resolution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    EmptyInputError,
    GridMismatchError,
    InfeasibleTargetError,
    MalformedRowError,
    TemperatureRangeError,
)

OCCUPANCY_HEADER = ["room_id", "timestamp", "occupied"]
WEATHER_HEADER = ["timestamp", "temp_c"]

TEMP_MIN_C = -60.0
TEMP_MAX_C = 60.0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid: a start timestamp, a step in minutes, a step count.

    The step must divide 1440 and the start must fall on a step boundary
    within its day, so day boundaries always align with steps.
    """

    start: datetime
    step_minutes: int
    n_steps: int

    def __post_init__(self) -> None:
        if self.step_minutes <= 0 or 1440 % self.step_minutes != 0:
            raise ConfigError(f"step_minutes must divide 1440, got {self.step_minutes}")
        if self.n_steps < 1:
            raise ConfigError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.start.second != 0 or self.start.microsecond != 0:
            raise ConfigError("grid start must have minute resolution")
        if (self.start.hour * 60 + self.start.minute) % self.step_minutes != 0:
            raise ConfigError("grid start must lie on a step boundary")

    @property
    def steps_per_day(self) -> int:
        return 1440 // self.step_minutes

    @property
    def step_seconds(self) -> float:
        return self.step_minutes * 60.0

    def timestamp(self, i: int) -> datetime:
        return self.start + timedelta(minutes=i * self.step_minutes)

    def timestamps(self) -> list[datetime]:
        step = timedelta(minutes=self.step_minutes)
        return [self.start + i * step for i in range(self.n_steps)]

    def minutes_of_day(self) -> np.ndarray:
        """Minute-of-day (0..1439) of each step start."""
        start_minute = self.start.hour * 60 + self.start.minute
        return (start_minute + np.arange(self.n_steps, dtype=np.int64) * self.step_minutes) % 1440

    def slots_of_day(self) -> np.ndarray:
        """Slot-of-day index (0..steps_per_day-1) of each step."""
        return self.minutes_of_day() // self.step_minutes

    def _datetimes64(self) -> np.ndarray:
        base = np.datetime64(self.start.replace(second=0, microsecond=0), "m")
        return base + np.arange(self.n_steps, dtype=np.int64) * np.timedelta64(self.step_minutes, "m")

    def dates(self) -> np.ndarray:
        """Calendar date (datetime64[D]) of each step."""
        return self._datetimes64().astype("datetime64[D]")

    def months(self) -> np.ndarray:
        """Calendar month (datetime64[M]) of each step."""
        return self._datetimes64().astype("datetime64[M]")

    def weekend_mask(self) -> np.ndarray:
        """True where the step falls on Saturday or Sunday."""
        days = self.dates().astype(np.int64)
        return (days + 3) % 7 >= 5  # 1970-01-01 is a Thursday

    def n_days(self) -> int:
        """Number of distinct calendar dates touched by the grid."""
        return len(np.unique(self.dates()))


@dataclass(frozen=True, eq=False)
class OccupancyTrace:
    """Binary occupancy series for one room on a grid."""

    room_id: str
    grid: TimeGrid
    occupied: np.ndarray

    def __post_init__(self) -> None:
        occ = np.ascontiguousarray(self.occupied, dtype=bool)
        if occ.shape != (self.grid.n_steps,):
            raise GridMismatchError(
                f"room {self.room_id}: {occ.shape[0] if occ.ndim == 1 else occ.shape} samples "
                f"for a grid of {self.grid.n_steps} steps"
            )
        occ.setflags(write=False)
        object.__setattr__(self, "occupied", occ)

    @property
    def occupied_fraction(self) -> float:
        return float(np.count_nonzero(self.occupied)) / self.grid.n_steps


@dataclass(frozen=True, eq=False)
class WeatherSeries:
    """Outdoor dry-bulb temperature (degC) on a grid."""

    grid: TimeGrid
    outdoor_temp_c: np.ndarray

    def __post_init__(self) -> None:
        temp = np.ascontiguousarray(self.outdoor_temp_c, dtype=np.float64)
        if temp.shape != (self.grid.n_steps,):
            raise GridMismatchError(
                f"{temp.shape} temperature samples for a grid of {self.grid.n_steps} steps"
            )
        if not np.all(np.isfinite(temp)):
            raise TemperatureRangeError("non-finite outdoor temperature")
        if temp.min() < TEMP_MIN_C or temp.max() > TEMP_MAX_C:
            raise TemperatureRangeError(
                f"outdoor temperature outside [{TEMP_MIN_C}, {TEMP_MAX_C}] degC: "
                f"[{temp.min():.1f}, {temp.max():.1f}]"
            )
        temp.setflags(write=False)
        object.__setattr__(self, "outdoor_temp_c", temp)


def require_same_grid(*grids: TimeGrid) -> TimeGrid:
    """Return the common grid, raising GridMismatchError if they differ."""
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grids differ: {first} vs {g}")
    return first


# ---------------------------------------------------------------------------
# CSV ingestion / serialization
# ---------------------------------------------------------------------------

def _parse_timestamp(raw: str, lineno: int) -> datetime:
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise MalformedRowError(f"line {lineno}: bad timestamp {raw!r}") from exc
    if ts.tzinfo is not None:
        raise MalformedRowError(f"line {lineno}: timestamps must be naive local time, got {raw!r}")
    return ts


def _infer_grid(timestamps: list[datetime], lineno0: int, grid_hint: TimeGrid | None) -> TimeGrid:
    if len(timestamps) < 2:
        if grid_hint is None:
            raise GridMismatchError("cannot infer grid step from a single row (pass grid_hint)")
        step = grid_hint.step_minutes
    else:
        delta = timestamps[1] - timestamps[0]
        step_s = delta.total_seconds()
        if step_s <= 0 or step_s % 60 != 0:
            raise GridMismatchError(f"line {lineno0 + 1}: irregular interval {delta}")
        step = int(step_s // 60)
    grid = TimeGrid(timestamps[0], step, len(timestamps))
    expect = timestamps[0]
    step_td = timedelta(minutes=step)
    for i, ts in enumerate(timestamps):
        if ts != expect:
            raise GridMismatchError(
                f"line {lineno0 + i}: expected timestamp {expect.isoformat()}, got {ts.isoformat()}"
            )
        expect += step_td
    return grid


def load_occupancy(path: str | Path, grid_hint: TimeGrid | None = None) -> list[OccupancyTrace]:
    """Load per-room binary occupancy traces from a canonical CSV file.

    The file carries a ``room_id,timestamp,occupied`` header; per room the
    timestamps must be strictly increasing at a constant grid-aligned
    interval, and every room must share the same grid. Gaps are errors, not
    imputed.
    """
    path = Path(path)
    rooms: dict[str, tuple[list[datetime], list[bool], int]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path}: empty file")
        if header != OCCUPANCY_HEADER:
            raise MalformedRowError(f"{path}: expected header {OCCUPANCY_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MalformedRowError(f"line {lineno}: expected 3 fields, got {len(row)}")
            room, raw_ts, raw_occ = row
            ts = _parse_timestamp(raw_ts, lineno)
            if raw_occ not in ("0", "1"):
                raise MalformedRowError(f"line {lineno}: occupancy must be 0 or 1, got {raw_occ!r}")
            if room not in rooms:
                rooms[room] = ([], [], lineno)
            rooms[room][0].append(ts)
            rooms[room][1].append(raw_occ == "1")
    if not rooms:
        raise EmptyInputError(f"{path}: no data rows")

    traces = []
    shared: TimeGrid | None = grid_hint
    for room, (timestamps, values, lineno0) in rooms.items():
        grid = _infer_grid(timestamps, lineno0, grid_hint)
        if shared is None:
            shared = grid
        elif grid != shared:
            raise GridMismatchError(f"room {room}: grid {grid} differs from {shared}")
        traces.append(OccupancyTrace(room, shared, np.asarray(values, dtype=bool)))
    return traces


def save_occupancy(traces: list[OccupancyTrace], path: str | Path) -> None:
    """Write traces in the canonical CSV format (UTF-8, LF, ISO timestamps)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(OCCUPANCY_HEADER) + "\n")
        for trace in traces:
            stamps = trace.grid.timestamps()
            for ts, occ in zip(stamps, trace.occupied):
                fh.write(f"{trace.room_id},{ts.isoformat()},{1 if occ else 0}\n")


def load_weather(path: str | Path, grid_hint: TimeGrid | None = None) -> WeatherSeries:
    """Load an outdoor temperature series; validates grid regularity and range."""
    path = Path(path)
    timestamps: list[datetime] = []
    temps: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path}: empty file")
        if header != WEATHER_HEADER:
            raise MalformedRowError(f"{path}: expected header {WEATHER_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise MalformedRowError(f"line {lineno}: expected 2 fields, got {len(row)}")
            timestamps.append(_parse_timestamp(row[0], lineno))
            try:
                temps.append(float(row[1]))
            except ValueError as exc:
                raise MalformedRowError(f"line {lineno}: bad temperature {row[1]!r}") from exc
    if not timestamps:
        raise EmptyInputError(f"{path}: no data rows")
    grid = _infer_grid(timestamps, 2, grid_hint)
    if grid_hint is not None and grid != grid_hint:
        raise GridMismatchError(f"weather grid {grid} differs from hint {grid_hint}")
    return WeatherSeries(grid, np.asarray(temps, dtype=np.float64))


def save_weather(series: WeatherSeries, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(WEATHER_HEADER) + "\n")
        for ts, t in zip(series.grid.timestamps(), series.outdoor_temp_c):
            fh.write(f"{ts.isoformat()},{float(t)!r}\n")


# ---------------------------------------------------------------------------
# Synthetic occupancy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthOccupancyConfig:
    """Diurnal office-style occupancy generator parameters.

    Per room and day the generator draws presence, then arrival/departure
    times from truncated normals, plus an optional midday gap. When
    ``target_mean_occupancy`` is set, presence probabilities are rescaled so
    the building-wide mean lands on the target.
    """

    n_rooms: int = 20
    n_days: int = 28
    start: datetime = field(default_factory=lambda: datetime(2025, 1, 6))  # a Monday
    step_minutes: int = 5
    mean_arrival_minute: float = 540.0  # 09:00
    arrival_spread_minutes: float = 60.0
    mean_departure_minute: float = 1050.0  # 17:30
    departure_spread_minutes: float = 60.0
    weekday_presence_prob: float = 0.65
    weekend_presence_prob: float = 0.10
    lunch_gap_prob: float = 0.5
    lunch_gap_minutes: float = 45.0
    target_mean_occupancy: float | None = None
    room_spread: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_rooms < 1 or self.n_days < 1:
            raise ConfigError("n_rooms and n_days must be >= 1")
        for name in ("weekday_presence_prob", "weekend_presence_prob", "lunch_gap_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {p}")
        if self.target_mean_occupancy is not None and not 0.0 <= self.target_mean_occupancy <= 1.0:
            raise ConfigError("target_mean_occupancy must be in [0, 1]")
        if self.mean_departure_minute <= self.mean_arrival_minute:
            raise ConfigError("mean departure must be after mean arrival")
        if not 0.0 <= self.room_spread < 1.0:
            raise ConfigError("room_spread must be in [0, 1)")


def university_office_preset(n_rooms: int = 20, n_days: int = 28, seed: int = 0,
                             start: datetime | None = None) -> SynthOccupancyConfig:
    """Office/university profile calibrated to a 20.2% building mean occupancy."""
    kwargs = {} if start is None else {"start": start}
    return SynthOccupancyConfig(
        n_rooms=n_rooms,
        n_days=n_days,
        target_mean_occupancy=0.202,
        seed=seed,
        **kwargs,
    )


def _largest_remainder(quotas: np.ndarray, cap: int, total: int) -> np.ndarray:
    """Integer allocation of `total` across rooms, proportional to `quotas`, capped per room."""
    base = np.minimum(np.floor(quotas).astype(np.int64), cap)
    remaining = total - int(base.sum())
    if remaining < 0:  # total rounded below the floors; trim the smallest remainders
        order = np.argsort(quotas - base, kind="stable")
        for idx in order:
            if remaining == 0:
                break
            if base[idx] > 0:
                base[idx] -= 1
                remaining += 1
    else:
        order = np.argsort(-(quotas - base), kind="stable")
        while remaining > 0:
            moved = False
            for idx in order:
                if remaining == 0:
                    break
                if base[idx] < cap:
                    base[idx] += 1
                    remaining -= 1
                    moved = True
            if not moved:
                raise InfeasibleTargetError("presence quota exceeds available days")
    return base


def synth_occupancy(cfg: SynthOccupancyConfig) -> list[OccupancyTrace]:
    """Generate per-room binary occupancy traces; pure function of the config.

    Presence is allocated as balanced per-room day quotas (rather than iid
    coin flips) so the realized building mean tracks the calibration target
    for every seed; which days are present stays random.
    """
    spd = 1440 // cfg.step_minutes
    grid = TimeGrid(cfg.start, cfg.step_minutes, cfg.n_days * spd)

    day_is_weekend = np.array(
        [(cfg.start + timedelta(days=d)).weekday() >= 5 for d in range(cfg.n_days)]
    )
    weekday_idx = np.flatnonzero(~day_is_weekend)
    weekend_idx = np.flatnonzero(day_is_weekend)

    expected_stay = (
        cfg.mean_departure_minute
        - cfg.mean_arrival_minute
        - cfg.lunch_gap_prob * cfg.lunch_gap_minutes
    )

    scale = 1.0
    if cfg.target_mean_occupancy is not None:
        weighted_days = (
            len(weekday_idx) * cfg.weekday_presence_prob
            + len(weekend_idx) * cfg.weekend_presence_prob
        )
        if cfg.target_mean_occupancy > 0 and (weighted_days == 0 or expected_stay <= 0):
            raise InfeasibleTargetError(
                "target occupancy is positive but presence probabilities or stay length are zero"
            )
        if cfg.target_mean_occupancy > 0:
            scale = cfg.target_mean_occupancy * 1440.0 * cfg.n_days / (expected_stay * weighted_days)
        else:
            scale = 0.0

    ss = np.random.SeedSequence(cfg.seed)
    master = np.random.default_rng(ss.spawn(1)[0])
    room_rngs = [np.random.default_rng(child) for child in ss.spawn(cfg.n_rooms)]

    # Per-room busyness factors, symmetric around 1 so the mean is preserved.
    if cfg.n_rooms > 1:
        factors = 1.0 + cfg.room_spread * np.linspace(-1.0, 1.0, cfg.n_rooms)
        master.shuffle(factors)
    else:
        factors = np.ones(1)

    def quotas_for(day_indices: np.ndarray, base_prob: float) -> np.ndarray:
        n = len(day_indices)
        if n == 0:
            return np.zeros(cfg.n_rooms, dtype=np.int64)
        probs = np.clip(factors * base_prob * scale, 0.0, None)
        if np.any(probs > 1.0 + 1e-9):
            raise InfeasibleTargetError(
                f"calibrated presence probability exceeds 1 (max {probs.max():.3f})"
            )
        raw = np.minimum(probs, 1.0) * n
        return _largest_remainder(raw, n, int(round(raw.sum())))

    wd_quota = quotas_for(weekday_idx, cfg.weekday_presence_prob)
    we_quota = quotas_for(weekend_idx, cfg.weekend_presence_prob)

    half_gap = cfg.lunch_gap_minutes / 2.0
    step_starts = np.arange(spd, dtype=np.float64) * cfg.step_minutes
    traces = []
    width = max(2, len(str(cfg.n_rooms)))
    for i in range(cfg.n_rooms):
        rng = room_rngs[i]
        occupied = np.zeros(grid.n_steps, dtype=bool)
        present: list[int] = []
        for day_indices, quota in ((weekday_idx, wd_quota[i]), (weekend_idx, we_quota[i])):
            if len(day_indices):
                chosen = rng.permutation(day_indices)[: int(quota)]
                present.extend(int(d) for d in chosen)
        for day in sorted(present):
            arrival = rng.normal(cfg.mean_arrival_minute, cfg.arrival_spread_minutes)
            departure = rng.normal(cfg.mean_departure_minute, cfg.departure_spread_minutes)
            arrival = min(max(arrival, 0.0), 1440.0 - cfg.step_minutes)
            departure = min(max(departure, arrival + cfg.step_minutes), 1440.0)
            day_mask = (step_starts >= arrival) & (step_starts < departure)
            if cfg.lunch_gap_minutes > 0 and rng.random() < cfg.lunch_gap_prob:
                center = rng.normal(765.0, 20.0)  # around 12:45
                day_mask &= ~((step_starts >= center - half_gap) & (step_starts < center + half_gap))
            occupied[day * spd : (day + 1) * spd] = day_mask
        traces.append(OccupancyTrace(f"room{i + 1:0{width}d}", grid, occupied))
    return traces


# ---------------------------------------------------------------------------
# Synthetic weather
# ---------------------------------------------------------------------------

def synth_weather(
    start: datetime,
    n_days: int,
    *,
    annual_mean_c: float = 10.0,
    annual_amplitude_c: float = 12.0,
    peak_yearday: int = 201,
    diurnal_amplitude_c: float = 5.0,
    noise_amplitude_c: float = 0.0,
    step_minutes: int = 5,
    seed: int = 0,
) -> WeatherSeries:
    """Seasonal mean + diurnal sinusoid + bounded uniform noise.

    The diurnal peak sits at 15:00 and the trough at 03:00, both on the step
    grid, so a noise-free day's max-min equals exactly twice the amplitude.
    """
    if n_days < 1:
        raise ConfigError("n_days must be >= 1")
    spd = 1440 // step_minutes
    grid = TimeGrid(start, step_minutes, n_days * spd)

    day_offset = np.arange(grid.n_steps, dtype=np.int64) * step_minutes // 1440
    start_yearday = start.timetuple().tm_yday
    yearday = (start_yearday - 1 + day_offset) % 365 + 1
    seasonal = annual_mean_c + annual_amplitude_c * np.cos(
        2.0 * np.pi * (yearday - peak_yearday) / 365.0
    )
    minute = grid.minutes_of_day().astype(np.float64)
    diurnal = diurnal_amplitude_c * np.cos(2.0 * np.pi * (minute - 900.0) / 1440.0)
    temp = seasonal + diurnal
    if noise_amplitude_c > 0:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        temp = temp + rng.uniform(-noise_amplitude_c, noise_amplitude_c, grid.n_steps)
    return WeatherSeries(grid, temp)


WEATHER_PRESETS: dict[str, dict[str, float]] = {
    # heating-dominant mild winter: roughly -1..9 C, never enters cooling
    "winter": {
        "annual_mean_c": 10.0,
        "annual_amplitude_c": 6.0,
        "diurnal_amplitude_c": 4.0,
        "noise_amplitude_c": 1.0,
    },
    # mid-latitude continental profile for summer-to-winter windows
    "pittsburgh": {
        "annual_mean_c": 11.0,
        "annual_amplitude_c": 14.0,
        "diurnal_amplitude_c": 5.0,
        "noise_amplitude_c": 1.5,
    },
}


def pittsburgh_preset(start: datetime | None = None, n_days: int = 196,
                      seed: int = 0) -> WeatherSeries:
    """Mid-latitude continental profile over a summer-to-winter window."""
    return synth_weather(
        start or datetime(2011, 6, 1), n_days, seed=seed, **WEATHER_PRESETS["pittsburgh"]
    )


def winter_preset(start: datetime | None = None, n_days: int = 28,
                  seed: int = 0) -> WeatherSeries:
    """Heating-dominant mild-winter profile (roughly -1..9 C, never enters the
    cooling regime)."""
    return synth_weather(
        start or datetime(2025, 1, 6), n_days, seed=seed, **WEATHER_PRESETS["winter"]
    )
