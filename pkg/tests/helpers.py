"""Small builders shared across test modules."""

from datetime import datetime

import numpy as np

from occusim import OccupancyTrace, TimeGrid, WeatherSeries

MONDAY = datetime(2025, 1, 6)  # grid start used throughout the tests


def make_grid(n_days: int = 1, start: datetime = MONDAY, step_minutes: int = 5) -> TimeGrid:
    return TimeGrid(start, step_minutes, n_days * (1440 // step_minutes))


def trace_from_windows(
    grid: TimeGrid,
    windows: list[tuple[int, int]],
    room_id: str = "roomA",
    weekdays_only: bool = False,
) -> OccupancyTrace:
    """Occupied wherever minute-of-day falls in any [start, end) window."""
    minutes = grid.minutes_of_day()
    occ = np.zeros(grid.n_steps, dtype=bool)
    for lo, hi in windows:
        occ |= (minutes >= lo) & (minutes < hi)
    if weekdays_only:
        occ &= ~grid.weekend_mask()
    return OccupancyTrace(room_id, grid, occ)


def constant_weather(grid: TimeGrid, temp_c: float) -> WeatherSeries:
    return WeatherSeries(grid, np.full(grid.n_steps, float(temp_c)))
