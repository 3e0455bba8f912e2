"""Bounds policies, strategies, setpoint schedule construction."""

import numpy as np
import pytest

from occusim import (
    BoundsPolicy,
    Strategy,
    build_schedule,
    oracle_predictions,
    standard_bounds,
)
from occusim.errors import ConfigError, GridMismatchError, MissingPredictionError
from occusim.trace import OccupancyTrace

from helpers import make_grid, trace_from_windows


def test_standard_bounds_bands():
    b = standard_bounds()
    assert (b["small"].unoccupied_heat_sp_c, b["small"].unoccupied_cool_sp_c) == (18.0, 26.0)
    assert (b["medium"].unoccupied_heat_sp_c, b["medium"].unoccupied_cool_sp_c) == (14.0, 30.0)
    assert (b["large"].unoccupied_heat_sp_c, b["large"].unoccupied_cool_sp_c) == (10.0, 34.0)
    assert all(p.occupied_heat_sp_c == 20.0 and p.occupied_cool_sp_c == 24.0 for p in b.values())


def test_bounds_policy_validation():
    with pytest.raises(ConfigError):
        BoundsPolicy("bad", setback_delta_c=0.0)
    with pytest.raises(ConfigError):
        BoundsPolicy("bad", setback_delta_c=2.0, occupied_heat_sp_c=25.0, occupied_cool_sp_c=24.0)


def test_reactive_always_occupied():
    grid = make_grid(1)
    trace = OccupancyTrace("r", grid, np.ones(grid.n_steps, dtype=bool))
    sched = build_schedule(Strategy.reactive(), trace, None, standard_bounds()["small"])
    assert sched.conditioned.all()
    assert (sched.heat_sp_c == 20.0).all()
    assert (sched.cool_sp_c == 24.0).all()


def test_predictive_oracle_preconditioning_window():
    grid = make_grid(1)
    trace = trace_from_windows(grid, [(540, 1020)])  # 09:00-17:00
    pred = oracle_predictions(trace, 60)
    sched = build_schedule(Strategy.predictive(), trace, pred, standard_bounds()["small"])
    minutes = grid.minutes_of_day()
    expect = (minutes >= 480) & (minutes < 1020)  # 08:00-17:00
    assert np.array_equal(sched.conditioned, expect)


def test_static_window_hours():
    grid = make_grid(7)
    trace = trace_from_windows(grid, [(540, 1020)], weekdays_only=True)
    sched = build_schedule(Strategy.static(), trace, None, standard_bounds()["large"])
    per_day = sched.conditioned.reshape(7, 288).sum(axis=1)
    assert (per_day == 180).all()  # 15 hours every day, occupancy-independent


def test_always_on():
    grid = make_grid(1)
    trace = trace_from_windows(grid, [(540, 600)])
    sched = build_schedule(Strategy.always_on(), trace, None, standard_bounds()["small"])
    assert sched.conditioned.all()


def test_predictive_requires_prediction():
    trace = trace_from_windows(make_grid(1), [(540, 600)])
    with pytest.raises(MissingPredictionError):
        build_schedule(Strategy.predictive(), trace, None, standard_bounds()["small"])


def test_grid_mismatch_rejected():
    t1 = trace_from_windows(make_grid(2), [(540, 1020)])
    pred = oracle_predictions(trace_from_windows(make_grid(3), [(540, 1020)]), 60)
    with pytest.raises(GridMismatchError):
        build_schedule(Strategy.predictive(), t1, pred, standard_bounds()["small"])


def test_schedule_values_are_two_pairs_only():
    grid = make_grid(3)
    rng = np.random.default_rng(2)
    trace = OccupancyTrace("r", grid, rng.random(grid.n_steps) < 0.3)
    bounds = standard_bounds()["medium"]
    sched = build_schedule(Strategy.reactive(), trace, None, bounds)
    assert set(np.unique(sched.heat_sp_c)) <= {14.0, 20.0}
    assert set(np.unique(sched.cool_sp_c)) <= {24.0, 30.0}
    assert (sched.heat_sp_c < sched.cool_sp_c).all()


@pytest.mark.parametrize("seed", range(5))
def test_predictive_conditioning_dominates_reactive(seed):
    grid = make_grid(14)
    rng = np.random.default_rng(seed)
    trace = OccupancyTrace("r", grid, rng.random(grid.n_steps) < 0.25)
    pred = oracle_predictions(trace, 60)
    bounds = standard_bounds()["small"]
    predictive = build_schedule(Strategy.predictive(), trace, pred, bounds)
    reactive = build_schedule(Strategy.reactive(), trace, None, bounds)
    assert (predictive.conditioned >= reactive.conditioned).all()


def test_oracle_predictive_equals_reactive_plus_preroll():
    # isolated bouts separated by more than the look-ahead
    grid = make_grid(1)
    trace = trace_from_windows(grid, [(480, 540), (720, 780), (1080, 1140)])
    pred = oracle_predictions(trace, 60)
    sched = build_schedule(Strategy.predictive(), trace, pred, standard_bounds()["small"])

    occ = trace.occupied
    preroll = np.zeros_like(occ)
    lsteps = 12
    for t in np.flatnonzero(occ[1:] & ~occ[:-1]) + 1:
        preroll[max(0, t - lsteps) : t] = True
    if occ[0]:
        preroll[0] = True
    expect = occ | preroll
    # beyond the prediction horizon the tail is reactive-only
    expect[pred.valid_len :] = occ[pred.valid_len :]
    assert np.array_equal(sched.conditioned, expect)


def test_predictive_reactive_tail_beyond_horizon():
    grid = make_grid(1)
    trace = trace_from_windows(grid, [(1390, 1440)])  # occupied during the final steps
    pred = oracle_predictions(trace, 60)
    sched = build_schedule(Strategy.predictive(), trace, pred, standard_bounds()["small"])
    assert np.array_equal(sched.conditioned[pred.valid_len :], trace.occupied[pred.valid_len :])


def test_static_window_validation():
    with pytest.raises(ConfigError):
        Strategy.static((1300, 1200))
