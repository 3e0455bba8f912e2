"""Slot-of-day occupancy likelihoods, realized error rates, accuracy accounting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import EmptyInputError, GridMismatchError, TraceTooShortError
from .trace import OccupancyTrace

if TYPE_CHECKING:
    from .predictor import PredictionTrace


@dataclass(frozen=True, eq=False)
class SlotWeights:
    """Empirical occupancy probability per slot-of-day, weekdays and weekends split.

    weekday_occ_prob[s] is (occupied weekday samples at slot s) / (weekday
    samples at slot s); slots never observed for a day type default to 0.5.
    """

    room_id: str
    slots_per_day: int
    weekday_occ_prob: np.ndarray
    weekend_occ_prob: np.ndarray


@dataclass(frozen=True)
class RateReport:
    """Realized confusion-matrix rates of a prediction trace against truth."""

    room_id: str
    fp_rate: float
    fn_rate: float
    accuracy: float
    n_pred: int
    n_truth_occ: int
    n_truth_unocc: int
    tp: int
    tn: int
    fp: int
    fn: int


def compute_slot_weights(trace: OccupancyTrace) -> SlotWeights:
    """Maximum-likelihood occupancy frequency per slot-of-day and day type."""
    grid = trace.grid
    if grid.n_steps * grid.step_minutes < 1440:
        raise TraceTooShortError(
            f"room {trace.room_id}: trace spans less than one full day"
        )
    slots = grid.slots_of_day()
    weekend = grid.weekend_mask()
    spd = grid.steps_per_day
    occ = trace.occupied.astype(np.float64)

    probs = []
    for mask in (~weekend, weekend):
        totals = np.bincount(slots[mask], minlength=spd).astype(np.float64)
        hits = np.bincount(slots[mask], weights=occ[mask], minlength=spd)
        with np.errstate(invalid="ignore"):
            p = hits / totals
        p[totals == 0] = 0.5  # never observed: maximum ignorance
        probs.append(p)
    return SlotWeights(trace.room_id, spd, probs[0], probs[1])


def measure_rates(pred: "PredictionTrace", truth: OccupancyTrace) -> RateReport:
    """Confusion-matrix rates comparing predictions at issue time t against
    truth at t + look-ahead; issue times whose horizon falls off the grid are
    excluded."""
    if pred.grid != truth.grid:
        raise GridMismatchError("prediction and truth are on different grids")
    steps = pred.lookahead_minutes // pred.grid.step_minutes
    horizon_truth = truth.occupied[steps : steps + pred.valid_len]
    predicted = pred.predicted_occupied[: pred.valid_len]

    tp = int(np.count_nonzero(predicted & horizon_truth))
    tn = int(np.count_nonzero(~predicted & ~horizon_truth))
    fp = int(np.count_nonzero(predicted & ~horizon_truth))
    fn = int(np.count_nonzero(~predicted & horizon_truth))
    n_occ = tp + fn
    n_unocc = tn + fp
    n_pred = tp + tn + fp + fn

    fp_rate = fp / n_unocc if n_unocc else 0.0
    fn_rate = fn / n_occ if n_occ else 0.0
    accuracy = (tp + tn) / n_pred if n_pred else 0.0
    return RateReport(
        room_id=truth.room_id,
        fp_rate=fp_rate,
        fn_rate=fn_rate,
        accuracy=accuracy,
        n_pred=n_pred,
        n_truth_occ=n_occ,
        n_truth_unocc=n_unocc,
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
    )


def expected_accuracy(fp_rate: float, fn_rate: float, occ_fraction: float) -> float:
    """Accuracy implied by error rates at a given occupancy fraction."""
    for name, v in (("fp_rate", fp_rate), ("fn_rate", fn_rate), ("occ_fraction", occ_fraction)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    return 1.0 - fp_rate * (1.0 - occ_fraction) - fn_rate * occ_fraction


@dataclass(frozen=True)
class OccupancySummary:
    per_room: dict[str, float]
    mean: float
    sd: float  # population SD across rooms


def occupancy_summary(traces: list[OccupancyTrace]) -> OccupancySummary:
    """Per-room occupied fraction plus building mean and population SD."""
    if not traces:
        raise EmptyInputError("no traces")
    per_room = {t.room_id: t.occupied_fraction for t in traces}
    values = np.array(list(per_room.values()))
    return OccupancySummary(per_room, float(values.mean()), float(values.std()))


def pool_rates(reports: list[RateReport]) -> RateReport:
    """Building-wide rates from summed confusion counts (per-prediction pooling)."""
    if not reports:
        raise EmptyInputError("no rate reports")
    tp = sum(r.tp for r in reports)
    tn = sum(r.tn for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    n_occ, n_unocc = tp + fn, tn + fp
    n_pred = tp + tn + fp + fn
    return RateReport(
        room_id="__pooled__",
        fp_rate=fp / n_unocc if n_unocc else 0.0,
        fn_rate=fn / n_occ if n_occ else 0.0,
        accuracy=(tp + tn) / n_pred if n_pred else 0.0,
        n_pred=n_pred,
        n_truth_occ=n_occ,
        n_truth_unocc=n_unocc,
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
    )
