"""Ingestion, validation, and synthesis of occupancy and weather series."""

from datetime import datetime, timedelta

import numpy as np
import pytest

from occusim import (
    OccupancyTrace,
    SynthOccupancyConfig,
    TimeGrid,
    load_occupancy,
    load_weather,
    save_occupancy,
    save_weather,
    synth_occupancy,
    synth_weather,
)
from occusim.errors import (
    ConfigError,
    EmptyInputError,
    GridMismatchError,
    InfeasibleTargetError,
    MalformedRowError,
    TemperatureRangeError,
)
from occusim.trace import pittsburgh_preset, university_office_preset

from helpers import MONDAY, make_grid


# ---------------------------------------------------------------------------
# TimeGrid
# ---------------------------------------------------------------------------

def test_grid_step_must_divide_day():
    with pytest.raises(ConfigError):
        TimeGrid(MONDAY, 7, 100)


def test_grid_start_must_align_to_step():
    with pytest.raises(ConfigError):
        TimeGrid(MONDAY + timedelta(minutes=3), 5, 10)


def test_grid_day_classification():
    grid = make_grid(n_days=7)
    weekend = grid.weekend_mask()
    # Mon-Fri then Sat/Sun
    assert not weekend[: 5 * 288].any()
    assert weekend[5 * 288 :].all()
    assert grid.n_days() == 7
    assert grid.steps_per_day == 288


def test_grid_slots_wrap_daily():
    grid = make_grid(n_days=2)
    slots = grid.slots_of_day()
    assert slots[0] == 0 and slots[287] == 287 and slots[288] == 0


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def _write_occupancy(path, rows):
    path.write_text("room_id,timestamp,occupied\n" + "".join(rows), newline="\n")


def test_load_occupancy_constant_zero(tmp_path):
    f = tmp_path / "occ.csv"
    rows = []
    ts = MONDAY
    for _ in range(2 * 288):
        rows.append(f"r1,{ts.isoformat()},0\n")
        ts += timedelta(minutes=5)
    _write_occupancy(f, rows)
    traces = load_occupancy(f)
    assert len(traces) == 1
    assert traces[0].grid.n_steps == 576
    assert not traces[0].occupied.any()


def test_load_occupancy_rejects_non_binary(tmp_path):
    f = tmp_path / "occ.csv"
    _write_occupancy(f, [f"r1,{MONDAY.isoformat()},0\n", f"r1,{(MONDAY + timedelta(minutes=5)).isoformat()},2\n"])
    with pytest.raises(MalformedRowError):
        load_occupancy(f)


def test_load_occupancy_rejects_bad_timestamp(tmp_path):
    f = tmp_path / "occ.csv"
    _write_occupancy(f, ["r1,not-a-time,0\n"])
    with pytest.raises(MalformedRowError):
        load_occupancy(f)


def test_load_occupancy_rejects_gap(tmp_path):
    f = tmp_path / "occ.csv"
    _write_occupancy(f, [
        f"r1,{MONDAY.isoformat()},0\n",
        f"r1,{(MONDAY + timedelta(minutes=5)).isoformat()},0\n",
        f"r1,{(MONDAY + timedelta(minutes=20)).isoformat()},1\n",
    ])
    with pytest.raises(GridMismatchError):
        load_occupancy(f)


def test_load_occupancy_empty(tmp_path):
    f = tmp_path / "occ.csv"
    f.write_text("room_id,timestamp,occupied\n")
    with pytest.raises(EmptyInputError):
        load_occupancy(f)


def test_load_occupancy_196_days_3_rooms(tmp_path):
    # 196 days at 5-minute steps: 196 * 288 = 56448 samples per room
    n_steps = 196 * 288
    rng = np.random.default_rng(0)
    traces_in = [
        OccupancyTrace(f"r{i}", TimeGrid(MONDAY, 5, n_steps), rng.random(n_steps) < 0.2)
        for i in range(3)
    ]
    f = tmp_path / "occ.csv"
    save_occupancy(traces_in, f)
    traces = load_occupancy(f)
    assert len(traces) == 3
    assert all(t.grid.n_steps == 56448 for t in traces)
    for a, b in zip(traces_in, traces):
        assert a.room_id == b.room_id
        assert np.array_equal(a.occupied, b.occupied)


def test_occupancy_round_trip_bytes(tmp_path):
    traces = synth_occupancy(university_office_preset(n_rooms=3, n_days=7, seed=5))
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    save_occupancy(traces, f1)
    save_occupancy(load_occupancy(f1), f2)
    assert f1.read_bytes() == f2.read_bytes()


def test_load_weather_constant(tmp_path):
    grid = make_grid(1)
    f = tmp_path / "weather.csv"
    rows = [f"{ts.isoformat()},10.0\n" for ts in grid.timestamps()]
    f.write_text("timestamp,temp_c\n" + "".join(rows), newline="\n")
    series = load_weather(f)
    assert series.grid.n_steps == 288
    assert (series.outdoor_temp_c == 10.0).all()


def test_load_weather_gap(tmp_path):
    f = tmp_path / "weather.csv"
    rows = [f"{MONDAY.isoformat()},5.0\n",
            f"{(MONDAY + timedelta(minutes=5)).isoformat()},5.0\n",
            f"{(MONDAY + timedelta(hours=4, minutes=10)).isoformat()},5.0\n"]
    f.write_text("timestamp,temp_c\n" + "".join(rows), newline="\n")
    with pytest.raises(GridMismatchError):
        load_weather(f)


def test_load_weather_out_of_range(tmp_path):
    f = tmp_path / "weather.csv"
    f.write_text(
        "timestamp,temp_c\n"
        f"{MONDAY.isoformat()},5.0\n"
        f"{(MONDAY + timedelta(minutes=5)).isoformat()},99.0\n",
        newline="\n",
    )
    with pytest.raises(TemperatureRangeError):
        load_weather(f)


def test_load_weather_sinusoid_extrema(tmp_path):
    series_in = synth_weather(MONDAY, 2, annual_mean_c=10.0, annual_amplitude_c=0.0,
                              diurnal_amplitude_c=10.0, noise_amplitude_c=0.0)
    f = tmp_path / "weather.csv"
    save_weather(series_in, f)
    series = load_weather(f)
    assert series.outdoor_temp_c.max() == pytest.approx(20.0)
    assert series.outdoor_temp_c.min() == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# Synthetic occupancy
# ---------------------------------------------------------------------------

def test_synth_zero_presence_means_unoccupied():
    cfg = SynthOccupancyConfig(n_rooms=3, n_days=7, weekday_presence_prob=0.0,
                               weekend_presence_prob=0.0, seed=1)
    traces = synth_occupancy(cfg)
    assert all(not t.occupied.any() for t in traces)


def test_synth_deterministic_for_seed():
    cfg = university_office_preset(n_rooms=4, n_days=14, seed=42)
    a = synth_occupancy(cfg)
    b = synth_occupancy(cfg)
    for ta, tb in zip(a, b):
        assert ta.room_id == tb.room_id
        assert np.array_equal(ta.occupied, tb.occupied)


@pytest.mark.parametrize("seed", [1, 2, 3, 11])
def test_synth_university_preset_hits_target(seed):
    traces = synth_occupancy(university_office_preset(n_rooms=20, n_days=28, seed=seed))
    total = sum(int(t.occupied.sum()) for t in traces)
    steps = sum(t.grid.n_steps for t in traces)
    assert 0.182 <= total / steps <= 0.222


def test_synth_infeasible_target():
    cfg = university_office_preset(n_rooms=5, n_days=28, seed=0)
    with pytest.raises(InfeasibleTargetError):
        synth_occupancy(SynthOccupancyConfig(
            n_rooms=cfg.n_rooms, n_days=cfg.n_days, seed=0,
            weekday_presence_prob=0.2, weekend_presence_prob=0.0,
            target_mean_occupancy=0.9,
        ))


def test_synth_trace_invariants():
    traces = synth_occupancy(university_office_preset(n_rooms=2, n_days=7, seed=3))
    for t in traces:
        assert t.occupied.dtype == bool
        assert len(t.occupied) == t.grid.n_steps


# ---------------------------------------------------------------------------
# Synthetic weather
# ---------------------------------------------------------------------------

def test_synth_weather_constant():
    series = synth_weather(MONDAY, 2, annual_mean_c=10.0, annual_amplitude_c=0.0,
                           diurnal_amplitude_c=0.0, noise_amplitude_c=0.0)
    assert (series.outdoor_temp_c == 10.0).all()


def test_synth_weather_diurnal_peak_to_peak():
    series = synth_weather(MONDAY, 3, annual_mean_c=10.0, annual_amplitude_c=0.0,
                           diurnal_amplitude_c=5.0, noise_amplitude_c=0.0)
    per_day = series.outdoor_temp_c.reshape(3, 288)
    spans = per_day.max(axis=1) - per_day.min(axis=1)
    assert np.allclose(spans, 10.0)


def test_synth_weather_seasonal_decline():
    series = pittsburgh_preset(start=datetime(2011, 6, 1), n_days=196, seed=0)
    months = series.grid.months()
    keys = np.unique(months)
    means = {str(k): float(series.outdoor_temp_c[months == k].mean()) for k in keys}
    aug_to_dec = [means[m] for m in ("2011-08", "2011-09", "2011-10", "2011-11", "2011-12")]
    assert all(a > b for a, b in zip(aug_to_dec, aug_to_dec[1:]))


def test_synth_weather_deterministic():
    a = synth_weather(MONDAY, 2, noise_amplitude_c=2.0, seed=9)
    b = synth_weather(MONDAY, 2, noise_amplitude_c=2.0, seed=9)
    assert np.array_equal(a.outdoor_temp_c, b.outdoor_temp_c)
