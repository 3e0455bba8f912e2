"""Turn occupancy information plus a setback policy into setpoint schedules."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GridMismatchError, MissingPredictionError
from .predictor import PredictionTrace
from .trace import OccupancyTrace, TimeGrid


@dataclass(frozen=True)
class BoundsPolicy:
    """Occupied setpoint pair plus the setback applied while unoccupied.

    Unoccupied heating setpoint is occupied_heat - delta, unoccupied cooling
    setpoint is occupied_cool + delta, so the unoccupied band strictly
    contains the occupied band.
    """

    name: str
    setback_delta_c: float
    occupied_heat_sp_c: float = 20.0
    occupied_cool_sp_c: float = 24.0

    def __post_init__(self) -> None:
        if self.occupied_heat_sp_c >= self.occupied_cool_sp_c:
            raise ConfigError("occupied heating setpoint must be below cooling setpoint")
        if self.setback_delta_c <= 0:
            raise ConfigError(f"setback delta must be > 0, got {self.setback_delta_c}")

    @property
    def unoccupied_heat_sp_c(self) -> float:
        return self.occupied_heat_sp_c - self.setback_delta_c

    @property
    def unoccupied_cool_sp_c(self) -> float:
        return self.occupied_cool_sp_c + self.setback_delta_c


# Table-standard setbacks: small 2C, medium 6C, large 10C.
# (One source in the reference material quotes 12C for the large case in
# prose; the tabulated ~20F conversion matches 10C, which is the default here.
# Override by constructing a custom BoundsPolicy.)
def standard_bounds() -> dict[str, BoundsPolicy]:
    return {
        "small": BoundsPolicy("small", 2.0),
        "medium": BoundsPolicy("medium", 6.0),
        "large": BoundsPolicy("large", 10.0),
    }


class StrategyKind(enum.Enum):
    PREDICTIVE = "predictive"
    REACTIVE = "reactive"
    STATIC = "static"
    ALWAYS_ON = "always_on"


@dataclass(frozen=True)
class Strategy:
    """Control strategy: what drives the occupied/setback decision at each step."""

    kind: StrategyKind
    static_window: tuple[int, int] | None = None  # minutes of day [start, end)

    def __post_init__(self) -> None:
        if self.kind is StrategyKind.STATIC:
            if self.static_window is None:
                object.__setattr__(self, "static_window", (360, 1260))  # 06:00-21:00
            start, end = self.static_window or (360, 1260)
            if not 0 <= start < end <= 1440:
                raise ConfigError(f"static window must satisfy 0 <= start < end <= 1440, got {self.static_window}")

    @classmethod
    def predictive(cls) -> "Strategy":
        return cls(StrategyKind.PREDICTIVE)

    @classmethod
    def reactive(cls) -> "Strategy":
        return cls(StrategyKind.REACTIVE)

    @classmethod
    def static(cls, window: tuple[int, int] = (360, 1260)) -> "Strategy":
        return cls(StrategyKind.STATIC, window)

    @classmethod
    def always_on(cls) -> "Strategy":
        return cls(StrategyKind.ALWAYS_ON)


@dataclass(frozen=True, eq=False)
class SetpointSchedule:
    """Per-step heating/cooling setpoints and the conditioning flag behind them."""

    room_id: str
    grid: TimeGrid
    heat_sp_c: np.ndarray
    cool_sp_c: np.ndarray
    conditioned: np.ndarray

    def __post_init__(self) -> None:
        for name in ("heat_sp_c", "cool_sp_c", "conditioned"):
            arr = np.ascontiguousarray(
                getattr(self, name), dtype=bool if name == "conditioned" else np.float64
            )
            if arr.shape != (self.grid.n_steps,):
                raise GridMismatchError(f"{name} has {arr.shape} samples, grid has {self.grid.n_steps}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.heat_sp_c >= self.cool_sp_c):
            raise ConfigError("heating setpoint must stay below cooling setpoint at every step")


def build_schedule(
    strategy: Strategy,
    truth: OccupancyTrace,
    pred: PredictionTrace | None,
    bounds: BoundsPolicy,
) -> SetpointSchedule:
    """Derive the conditioning pattern for a strategy and apply the bounds policy.

    Predictive conditioning is the union of current truth (reactive fallback)
    and the raw predictions at their issue times, so a prediction issued now
    about t + L starts pre-conditioning now. Beyond the prediction horizon the
    tail is purely reactive.
    """
    grid = truth.grid
    if strategy.kind is StrategyKind.PREDICTIVE:
        if pred is None:
            raise MissingPredictionError("predictive strategy needs a prediction trace")
        if pred.grid != grid:
            raise GridMismatchError("prediction and truth are on different grids")
        conditioned = truth.occupied.copy()
        conditioned[: pred.valid_len] |= pred.predicted_occupied
    elif strategy.kind is StrategyKind.REACTIVE:
        conditioned = truth.occupied.copy()
    elif strategy.kind is StrategyKind.STATIC:
        start, end = strategy.static_window  # type: ignore[misc]
        minutes = grid.minutes_of_day()
        conditioned = (minutes >= start) & (minutes < end)
    else:  # ALWAYS_ON
        conditioned = np.ones(grid.n_steps, dtype=bool)

    heat = np.where(conditioned, bounds.occupied_heat_sp_c, bounds.unoccupied_heat_sp_c)
    cool = np.where(conditioned, bounds.occupied_cool_sp_c, bounds.unoccupied_cool_sp_c)
    return SetpointSchedule(truth.room_id, grid, heat, cool, conditioned)
