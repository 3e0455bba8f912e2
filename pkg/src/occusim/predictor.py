"""Simulated occupancy predictor: oracle look-ahead plus controlled error injection.

The predictor never learns anything; it degrades a perfect (oracle) forecast
until the realized false-positive / false-negative rates hit the configured
targets exactly. Errors are placed as temporal clusters, seeded preferentially
at times of day where prediction is hard (occupancy probability close to the
wrong class), and false-negative clusters are cut short when the room actually
becomes occupied, mirroring a control system that falls back to reactive mode.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DegenerateClassError,
    GridMismatchError,
    LookaheadTooLongError,
    QuotaInfeasibleError,
)
from .stats import SlotWeights
from .trace import OccupancyTrace, TimeGrid


@dataclass(frozen=True)
class ErrorModel:
    """Target prediction quality and error-shape parameters."""

    fp_rate_target: float
    fn_rate_target: float
    lookahead_minutes: int = 60
    cluster_min_minutes: int = 5
    cluster_max_minutes: int = 60
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("fp_rate_target", "fn_rate_target"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ConfigError(f"{name} must be in [0, 1), got {v}")
        if self.lookahead_minutes < 10:
            raise ConfigError(f"lookahead must be >= 10 minutes, got {self.lookahead_minutes}")
        if not 0 < self.cluster_min_minutes <= self.cluster_max_minutes:
            raise ConfigError("need 0 < cluster_min_minutes <= cluster_max_minutes")

    def validate_for_grid(self, grid: TimeGrid) -> None:
        step = grid.step_minutes
        for name in ("lookahead_minutes", "cluster_min_minutes", "cluster_max_minutes"):
            v = getattr(self, name)
            if v % step != 0:
                raise ConfigError(f"{name}={v} is not a multiple of the {step}-minute grid step")


@dataclass(frozen=True, eq=False)
class PredictionTrace:
    """Simulated predictor output indexed by issue time.

    predicted_occupied[t] is the prediction issued at step t about step
    t + lookahead; it has valid_len entries (issue times whose horizon falls
    off the grid are absent, never fabricated). fn_shortfall / fp_shortfall
    are nonzero only when a tiny trace cannot realize the exact quota.
    """

    room_id: str
    grid: TimeGrid
    lookahead_minutes: int
    predicted_occupied: np.ndarray
    fn_shortfall: int = 0
    fp_shortfall: int = 0

    def __post_init__(self) -> None:
        pred = np.ascontiguousarray(self.predicted_occupied, dtype=bool)
        expected = self.grid.n_steps - self.lookahead_steps
        if pred.shape != (expected,):
            raise GridMismatchError(
                f"prediction length {pred.shape} does not match valid length {expected}"
            )
        pred.setflags(write=False)
        object.__setattr__(self, "predicted_occupied", pred)

    @property
    def lookahead_steps(self) -> int:
        return self.lookahead_minutes // self.grid.step_minutes

    @property
    def valid_len(self) -> int:
        return self.grid.n_steps - self.lookahead_steps


def _room_stream(seed: int, room_id: str) -> np.random.Generator:
    """Per-room RNG stream: stable under parallel execution order."""
    digest = hashlib.sha256(room_id.encode("utf-8")).digest()
    room_key = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([seed, room_key]))


def oracle_predictions(truth: OccupancyTrace, lookahead_minutes: int) -> PredictionTrace:
    """Perfect predictor: the truth shifted back by the look-ahead."""
    step = truth.grid.step_minutes
    if lookahead_minutes < 10 or lookahead_minutes % step != 0:
        raise ConfigError(
            f"lookahead must be >= 10 minutes and a multiple of {step}, got {lookahead_minutes}"
        )
    steps = lookahead_minutes // step
    if steps >= truth.grid.n_steps:
        raise LookaheadTooLongError(
            f"lookahead of {steps} steps >= trace length {truth.grid.n_steps}"
        )
    return PredictionTrace(
        room_id=truth.room_id,
        grid=truth.grid,
        lookahead_minutes=lookahead_minutes,
        predicted_occupied=truth.occupied[steps:].copy(),
    )


def _draw_cluster_steps(rng: np.random.Generator, model: ErrorModel, step_minutes: int) -> int:
    n_choices = (model.cluster_max_minutes - model.cluster_min_minutes) // step_minutes + 1
    return model.cluster_min_minutes // step_minutes + int(rng.integers(0, n_choices))


def _place_class_errors(
    rng: np.random.Generator,
    flip: np.ndarray,
    eligible: np.ndarray,
    weights: np.ndarray,
    target: int,
    in_class: np.ndarray,
    stop_before: np.ndarray,
    model: ErrorModel,
    step_minutes: int,
    cluster_log: list | None = None,
) -> int:
    """Flip `target` steps of one error class in place; returns the shortfall.

    Seeds are drawn without replacement, weight-proportional; each seed grows
    a forward cluster that stops at class boundaries, at `stop_before` marks,
    and at the end of the valid range. The final cluster is trimmed from its
    tail so the flipped count lands exactly on the quota.
    """
    if target == 0:
        return 0
    pool = weights.astype(np.float64).copy()
    index_of = np.full(len(flip), -1, dtype=np.int64)
    index_of[eligible] = np.arange(len(eligible))

    count = 0
    while count < target:
        total = pool.sum()
        if total > 0:
            r = rng.random() * total
            pos = int(np.searchsorted(np.cumsum(pool), r, side="right"))
            pos = min(pos, len(pool) - 1)
        else:
            # weight mass exhausted (e.g. all-zero difficulty weights): fall
            # back to uniform seeding over whatever eligible steps remain
            unflipped = np.flatnonzero(~flip[eligible])
            if len(unflipped) == 0:
                return target - count
            pos = int(unflipped[int(rng.integers(0, len(unflipped)))])
        t0 = int(eligible[pos])
        if flip[t0]:  # zero-width cumsum bucket hit exactly on a boundary
            pool[pos] = 0.0
            continue
        length = _draw_cluster_steps(rng, model, step_minutes)

        new_steps: list[int] = []
        t = t0
        while t < len(flip) and (t - t0) < length and in_class[t]:
            if t > t0 and stop_before[t]:
                break
            if not flip[t]:
                new_steps.append(t)
                flip[t] = True
                pool[index_of[t]] = 0.0
                count += 1
            t += 1
        if count > target:
            excess = count - target
            for extra in new_steps[-excess:]:
                flip[extra] = False
            new_steps = new_steps[:-excess]
            count = target
        if cluster_log is not None and new_steps:
            cluster_log.append((t0, new_steps))
    return 0


def place_errors(
    oracle: PredictionTrace,
    truth: OccupancyTrace,
    weights: SlotWeights,
    model: ErrorModel,
    cluster_log: dict[str, list] | None = None,
) -> PredictionTrace:
    """Inject clustered FP/FN errors into an oracle trace at exact target rates.

    Quotas are exact: the number of flipped steps per class equals
    round(rate * eligible steps), so the realized rates measured afterwards sit
    within half a step of the targets. FN clusters seed preferentially at
    horizon slots with low empirical occupancy probability (hard times), FP
    clusters at high-probability slots; both respect class boundaries and FN
    clusters are additionally cut at occupancy onsets (reactive fallback).

    Pass a dict as cluster_log to receive per-class lists of
    (seed_issue_step, flipped_steps) for placement diagnostics.
    """
    if oracle.grid != truth.grid:
        raise GridMismatchError("oracle and truth are on different grids")
    model.validate_for_grid(truth.grid)
    if model.lookahead_minutes != oracle.lookahead_minutes:
        raise ConfigError(
            f"model lookahead {model.lookahead_minutes} != oracle lookahead "
            f"{oracle.lookahead_minutes}"
        )
    grid = truth.grid
    lsteps = oracle.lookahead_steps
    valid = oracle.valid_len

    horizon_occ = truth.occupied[lsteps : lsteps + valid]
    issue_occ = truth.occupied[:valid]
    slots_h = grid.slots_of_day()[lsteps : lsteps + valid]
    weekend_h = grid.weekend_mask()[lsteps : lsteps + valid]
    occ_prob = np.where(
        weekend_h, weights.weekend_occ_prob[slots_h], weights.weekday_occ_prob[slots_h]
    )

    # Occupancy onsets at issue time: where an FN cluster must be cut.
    onset = np.zeros(valid, dtype=bool)
    onset[1:] = issue_occ[1:] & ~issue_occ[:-1]
    no_stop = np.zeros(valid, dtype=bool)

    rng = _room_stream(model.seed, truth.room_id)
    flip_fn = np.zeros(valid, dtype=bool)
    flip_fp = np.zeros(valid, dtype=bool)
    shortfalls = []
    for tag, flip, rate, eligible_mask, wts, stop in (
        ("fn", flip_fn, model.fn_rate_target, horizon_occ, 1.0 - occ_prob, onset),
        ("fp", flip_fp, model.fp_rate_target, ~horizon_occ, occ_prob, no_stop),
    ):
        eligible = np.flatnonzero(eligible_mask)
        if rate > 0 and len(eligible) == 0:
            raise DegenerateClassError(
                f"room {truth.room_id}: no eligible steps for a nonzero target rate"
            )
        target = int(round(rate * len(eligible)))
        if target > len(eligible):
            raise QuotaInfeasibleError(
                f"room {truth.room_id}: quota {target} exceeds {len(eligible)} eligible steps"
            )
        log = None
        if cluster_log is not None:
            log = cluster_log.setdefault(tag, [])
        shortfalls.append(
            _place_class_errors(
                rng, flip, eligible, wts[eligible], target, eligible_mask, stop,
                model, grid.step_minutes, log,
            )
        )

    predicted = oracle.predicted_occupied.copy()
    predicted[flip_fn] = False
    predicted[flip_fp] = True
    return PredictionTrace(
        room_id=truth.room_id,
        grid=grid,
        lookahead_minutes=model.lookahead_minutes,
        predicted_occupied=predicted,
        fn_shortfall=shortfalls[0],
        fp_shortfall=shortfalls[1],
    )


def cluster_length_stats(
    model: ErrorModel, n_samples: int, step_minutes: int = 5
) -> tuple[float, float]:
    """Empirical mean/SD (minutes) of the raw cluster-length draw, pre-truncation."""
    if n_samples < 1000:
        raise ValueError(f"need n_samples >= 1000, got {n_samples}")
    if model.cluster_min_minutes % step_minutes or model.cluster_max_minutes % step_minutes:
        raise ConfigError("cluster bounds must be multiples of the step")
    rng = np.random.default_rng(np.random.SeedSequence([model.seed, 0x636C7573]))
    n_choices = (model.cluster_max_minutes - model.cluster_min_minutes) // step_minutes + 1
    lengths = model.cluster_min_minutes + step_minutes * rng.integers(0, n_choices, size=n_samples)
    return float(lengths.mean()), float(lengths.std())


def save_predictions(preds: list[PredictionTrace], path: str | Path) -> None:
    """Dump prediction traces as CSV: room, issue time, horizon time, value."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("room_id,issue_timestamp,horizon_timestamp,predicted\n")
        for p in preds:
            stamps = p.grid.timestamps()
            lsteps = p.lookahead_steps
            for t in range(p.valid_len):
                fh.write(
                    f"{p.room_id},{stamps[t].isoformat()},"
                    f"{stamps[t + lsteps].isoformat()},{1 if p.predicted_occupied[t] else 0}\n"
                )
