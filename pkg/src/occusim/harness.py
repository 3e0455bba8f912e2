"""Experiment orchestration: the condition grid, baselines, reports and exports.

A sweep crosses every (fp, fn, bounds) cell and adds the two baseline runs
(reactive at small bounds, static schedule at large bounds). All randomness
flows from explicit seeds; rooms are independent and merged in sorted room-id
order, so reruns and re-aggregations are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .control import BoundsPolicy, SetpointSchedule, Strategy, StrategyKind, build_schedule, standard_bounds
from .errors import ConfigError, EmptyInputError, InsufficientGridError
from .metrics import (
    ComfortConfig,
    RoomRecord,
    RunLabel,
    RunMetrics,
    aggregate_records,
    misstime,
    percent_savings,
)
from .predictor import ErrorModel, oracle_predictions, place_errors
from .stats import RateReport, SlotWeights, compute_slot_weights, measure_rates
from .thermal import DegreeMinutesParams, RoomThermalParams, degree_minutes_energy, simulate_room
from .trace import OccupancyTrace, WeatherSeries, require_same_grid


@dataclass(frozen=True)
class SweepSpec:
    """Full description of one experiment grid."""

    fp_rates: tuple[float, ...] = (0.25, 0.15, 0.05)
    fn_rates: tuple[float, ...] = (0.25, 0.15, 0.05)
    bounds_names: tuple[str, ...] = ("small", "medium", "large")
    lookahead_minutes: int = 60
    cluster_min_minutes: int = 5
    cluster_max_minutes: int = 60
    baselines: tuple[tuple[str, str], ...] = (("reactive", "small"), ("static", "large"))
    static_window: tuple[int, int] = (360, 1260)
    seeds: tuple[int, ...] = (7,)
    backend: str = "rc"  # "rc" | "degree_minutes"
    comfort: ComfortConfig = field(default_factory=ComfortConfig)
    bounds_catalog: dict[str, BoundsPolicy] = field(default_factory=standard_bounds)

    def __post_init__(self) -> None:
        if self.backend not in ("rc", "degree_minutes"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        for name in self.bounds_names + tuple(b for _, b in self.baselines):
            if name not in self.bounds_catalog:
                raise ConfigError(f"bounds {name!r} not in the bounds catalog")
        for strat, _ in self.baselines:
            if strat not in ("reactive", "static", "always_on"):
                raise ConfigError(f"unsupported baseline strategy {strat!r}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")

    @property
    def n_conditions_per_seed(self) -> int:
        return len(self.fp_rates) * len(self.fn_rates) * len(self.bounds_names) + len(self.baselines)


def _strategy_from_name(name: str, window: tuple[int, int]) -> Strategy:
    return {
        "predictive": Strategy.predictive(),
        "reactive": Strategy.reactive(),
        "static": Strategy.static(window),
        "always_on": Strategy.always_on(),
    }[name]


def run_condition(
    label: RunLabel,
    traces: list[OccupancyTrace],
    weather: WeatherSeries,
    bounds: BoundsPolicy,
    *,
    backend: str = "rc",
    thermal_params: RoomThermalParams | None = None,
    proxy_params: DegreeMinutesParams | None = None,
    comfort: ComfortConfig | None = None,
    error_model: ErrorModel | None = None,
    slot_weights: dict[str, SlotWeights] | None = None,
    static_window: tuple[int, int] = (360, 1260),
) -> tuple[RunMetrics, list[RoomRecord]]:
    """Simulate one condition over all rooms and aggregate it.

    For predictive runs an ErrorModel is required; slot weights are computed
    from the truth traces unless supplied (callers that sweep many conditions
    should precompute them once).
    """
    if not traces:
        raise EmptyInputError("no traces")
    traces = sorted(traces, key=lambda t: t.room_id)
    require_same_grid(*(t.grid for t in traces), weather.grid)
    strategy = _strategy_from_name(label.strategy, static_window)
    thermal_params = thermal_params or RoomThermalParams()
    proxy_params = proxy_params or DegreeMinutesParams()
    comfort = comfort or ComfortConfig()
    comfort = replace(
        comfort, band_heat_c=bounds.occupied_heat_sp_c, band_cool_c=bounds.occupied_cool_sp_c
    )

    records: list[RoomRecord] = []
    for trace in traces:
        pred = None
        rate: RateReport | None = None
        if strategy.kind is StrategyKind.PREDICTIVE:
            if error_model is None:
                raise ConfigError("predictive condition needs an error model")
            oracle = oracle_predictions(trace, error_model.lookahead_minutes)
            weights = (slot_weights or {}).get(trace.room_id) or compute_slot_weights(trace)
            pred = place_errors(oracle, trace, weights, error_model)
            rate = measure_rates(pred, trace)
        schedule = build_schedule(strategy, trace, pred, bounds)
        if backend == "rc":
            result = simulate_room(schedule, weather, thermal_params)
        else:
            result = degree_minutes_energy(schedule, weather, proxy_params)
        records.append(
            RoomRecord(
                room_id=trace.room_id,
                monthly_energy_kwh=result.monthly_energy_kwh,
                misstime_daily_min=misstime(result, trace, comfort),
                occ_fraction=trace.occupied_fraction,
                rate=rate,
            )
        )
    return aggregate_records(label, records), records


@dataclass
class SweepReport:
    """All RunMetrics of a sweep plus enough provenance to reproduce it."""

    spec: SweepSpec
    rows: list[RunMetrics]
    records: dict[str, list[RoomRecord]]  # condition label -> room records
    provenance: dict

    def row(self, condition: str) -> RunMetrics:
        for m in self.rows:
            if m.label.condition == condition:
                return m
        raise KeyError(condition)


def _spec_to_dict(spec: SweepSpec) -> dict:
    return {
        "fp_rates": list(spec.fp_rates),
        "fn_rates": list(spec.fn_rates),
        "bounds_names": list(spec.bounds_names),
        "lookahead_minutes": spec.lookahead_minutes,
        "cluster_min_minutes": spec.cluster_min_minutes,
        "cluster_max_minutes": spec.cluster_max_minutes,
        "baselines": [list(b) for b in spec.baselines],
        "static_window": list(spec.static_window),
        "seeds": list(spec.seeds),
        "backend": spec.backend,
        "comfort": {
            "mode": spec.comfort.mode.value,
            "fixed_comfort_temp_c": spec.comfort.fixed_comfort_temp_c,
            "tolerance_c": spec.comfort.tolerance_c,
        },
        "bounds_catalog": {
            name: {
                "setback_delta_c": b.setback_delta_c,
                "occupied_heat_sp_c": b.occupied_heat_sp_c,
                "occupied_cool_sp_c": b.occupied_cool_sp_c,
            }
            for name, b in sorted(spec.bounds_catalog.items())
        },
    }


def run_sweep(
    spec: SweepSpec,
    traces: list[OccupancyTrace],
    weather: WeatherSeries,
    thermal_params: RoomThermalParams | None = None,
    proxy_params: DegreeMinutesParams | None = None,
) -> SweepReport:
    """Run the full grid plus baselines for every seed in the spec."""
    if not traces:
        raise EmptyInputError("no traces")
    traces = sorted(traces, key=lambda t: t.room_id)
    require_same_grid(*(t.grid for t in traces), weather.grid)
    slot_weights = {t.room_id: compute_slot_weights(t) for t in traces}

    rows: list[RunMetrics] = []
    records: dict[str, list[RoomRecord]] = {}

    def _run(label: RunLabel, bounds: BoundsPolicy, model: ErrorModel | None) -> None:
        run_metrics, recs = run_condition(
            label,
            traces,
            weather,
            bounds,
            backend=spec.backend,
            thermal_params=thermal_params,
            proxy_params=proxy_params,
            comfort=spec.comfort,
            error_model=model,
            slot_weights=slot_weights,
            static_window=spec.static_window,
        )
        rows.append(run_metrics)
        records[label.condition] = recs

    for seed in spec.seeds:
        for strat_name, bounds_name in spec.baselines:
            _run(RunLabel(strat_name, bounds_name, seed), spec.bounds_catalog[bounds_name], None)
        for fp in spec.fp_rates:
            for fn in spec.fn_rates:
                model = ErrorModel(
                    fp_rate_target=fp,
                    fn_rate_target=fn,
                    lookahead_minutes=spec.lookahead_minutes,
                    cluster_min_minutes=spec.cluster_min_minutes,
                    cluster_max_minutes=spec.cluster_max_minutes,
                    seed=seed,
                )
                for bounds_name in spec.bounds_names:
                    _run(
                        RunLabel("predictive", bounds_name, seed, fp_rate=fp, fn_rate=fn),
                        spec.bounds_catalog[bounds_name],
                        model,
                    )

    spec_dict = _spec_to_dict(spec)
    config_blob = json.dumps(spec_dict, sort_keys=True).encode()
    provenance = {
        "version": __version__,
        "config": spec_dict,
        "config_sha256": hashlib.sha256(config_blob).hexdigest(),
        "seeds": list(spec.seeds),
        "n_rooms": len(traces),
        "grid": {
            "start": traces[0].grid.start.isoformat(),
            "step_minutes": traces[0].grid.step_minutes,
            "n_steps": traces[0].grid.n_steps,
        },
    }
    return SweepReport(spec=spec, rows=rows, records=records, provenance=provenance)


# ---------------------------------------------------------------------------
# Sensitivity analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityRow:
    """Average effect of one adjacent-rate step, marginalized over the rest of the grid."""

    quantity: str  # "energy_kwh" (fp steps) or "misstime_min" (fn steps)
    rate_kind: str  # "fp" | "fn"
    rate_from: float
    rate_to: float
    absolute_delta: float
    percent_delta: float


def sensitivity_table(report: SweepReport) -> list[SensitivityRow]:
    """Adjacent-pair deltas: energy per fp step, MissTime per fn step."""
    spec = report.spec
    if len(spec.fp_rates) < 2 or len(spec.fn_rates) < 2:
        raise InsufficientGridError("need at least two fp and two fn levels")
    predictive = [m for m in report.rows if m.label.strategy == "predictive"]

    def _mean(metric: str, kind: str, rate: float) -> float:
        vals = [
            getattr(m, metric)
            for m in predictive
            if (m.label.fp_rate if kind == "fp" else m.label.fn_rate) == rate
        ]
        return float(np.mean(vals))

    out: list[SensitivityRow] = []
    fp_sorted = sorted(spec.fp_rates, reverse=True)
    for hi, lo in zip(fp_sorted, fp_sorted[1:]):
        e_hi = _mean("total_energy_kwh", "fp", hi)
        e_lo = _mean("total_energy_kwh", "fp", lo)
        out.append(
            SensitivityRow("energy_kwh", "fp", hi, lo, e_hi - e_lo,
                           100.0 * (e_hi - e_lo) / e_hi if e_hi else 0.0)
        )
    fn_sorted = sorted(spec.fn_rates, reverse=True)
    for hi, lo in zip(fn_sorted, fn_sorted[1:]):
        m_hi = _mean("misstime_avg_daily_min", "fn", hi)
        m_lo = _mean("misstime_avg_daily_min", "fn", lo)
        out.append(
            SensitivityRow("misstime_min", "fn", hi, lo, m_hi - m_lo,
                           100.0 * (m_hi - m_lo) / m_hi if m_hi else 0.0)
        )
    return out


# ---------------------------------------------------------------------------
# Schedule export (for external building-simulation tools)
# ---------------------------------------------------------------------------

def export_schedules(schedules: list[SetpointSchedule], out_dir: str | Path) -> dict:
    """Write one heating and one cooling file per room: one setpoint per line.

    Files are headerless, LF-terminated, dot-decimal; a manifest maps each
    room to its files and records the grid so external tools can align them.
    """
    if not schedules:
        raise EmptyInputError("no schedules to export")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = require_same_grid(*(s.grid for s in schedules))
    manifest: dict = {
        "start": grid.start.isoformat(),
        "step_minutes": grid.step_minutes,
        "n_steps": grid.n_steps,
        "rooms": {},
    }
    for sched in sorted(schedules, key=lambda s: s.room_id):
        files = {}
        for kind, series in (("heating", sched.heat_sp_c), ("cooling", sched.cool_sp_c)):
            name = f"{sched.room_id}_{kind}.txt"
            with (out / name).open("w", encoding="utf-8", newline="\n") as fh:
                for v in series:
                    fh.write(f"{float(v)!r}\n")
            files[kind] = name
        manifest["rooms"][sched.room_id] = files
    with (out / "schedules_manifest.json").open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def load_schedule_file(path: str | Path) -> np.ndarray:
    """Parse an exported setpoint file back into a float array."""
    with Path(path).open(encoding="utf-8") as fh:
        return np.array([float(line) for line in fh if line.strip()], dtype=np.float64)


def save_schedule_csv(schedule: SetpointSchedule, path: str | Path) -> None:
    """Per-room schedule dump: one row per step with both setpoints and the flag."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("timestamp,heat_sp_c,cool_sp_c,conditioned\n")
        for ts, heat, cool, cond in zip(
            schedule.grid.timestamps(), schedule.heat_sp_c, schedule.cool_sp_c,
            schedule.conditioned,
        ):
            fh.write(f"{ts.isoformat()},{float(heat)!r},{float(cool)!r},{1 if cond else 0}\n")


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _row_sort_key(m: RunMetrics):
    lbl = m.label
    return (
        lbl.strategy,
        -1.0 if lbl.fp_rate is None else lbl.fp_rate,
        -1.0 if lbl.fn_rate is None else lbl.fn_rate,
        lbl.bounds,
        lbl.seed,
    )


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def _metrics_rows(rows: list[RunMetrics]) -> list[list[str]]:
    out = []
    for m in sorted(rows, key=_row_sort_key):
        pooled = m.rates_pooled
        out.append([
            m.label.condition,
            m.label.strategy,
            _fmt(m.label.fp_rate),
            _fmt(m.label.fn_rate),
            m.label.bounds,
            str(m.label.seed),
            _fmt(m.total_energy_kwh),
            _fmt(m.misstime_avg_daily_min),
            _fmt(m.misstime_sd_daily_min),
            _fmt(m.misstime_pooled_daily_min),
            _fmt(pooled.fp_rate if pooled else None),
            _fmt(pooled.fn_rate if pooled else None),
            _fmt(pooled.accuracy if pooled else None),
            _fmt(m.accuracy_room_mean),
        ])
    return out


METRICS_HEADER = [
    "condition", "strategy", "fp_rate_target", "fn_rate_target", "bounds", "seed",
    "total_energy_kwh", "misstime_avg_daily_min", "misstime_sd_daily_min",
    "misstime_pooled_daily_min", "fp_rate_realized", "fn_rate_realized",
    "accuracy_pooled", "accuracy_room_mean",
]


def write_report_files(report: SweepReport, out_dir: str | Path) -> None:
    """Write raw per-room files plus the flat metrics/figure CSVs and manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for metrics_row in report.rows:
        cond = metrics_row.label.condition
        cdir = out / "raw" / cond
        cdir.mkdir(parents=True, exist_ok=True)
        meta = {
            "strategy": metrics_row.label.strategy,
            "bounds": metrics_row.label.bounds,
            "seed": metrics_row.label.seed,
            "fp_rate": metrics_row.label.fp_rate,
            "fn_rate": metrics_row.label.fn_rate,
        }
        with (cdir / "condition.json").open("w", encoding="utf-8", newline="\n") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for rec in report.records[cond]:
            rows = []
            for month, kwh in sorted(rec.monthly_energy_kwh.items()):
                r = rec.rate
                rows.append([
                    rec.room_id, month, _fmt(kwh), _fmt(rec.misstime_daily_min),
                    _fmt(rec.occ_fraction),
                    str(r.tp) if r else "", str(r.tn) if r else "",
                    str(r.fp) if r else "", str(r.fn) if r else "",
                ])
            _write_csv(
                cdir / f"{rec.room_id}.csv",
                ["room_id", "month", "energy_kwh", "misstime_daily_min", "occ_fraction",
                 "tp", "tn", "fp", "fn"],
                rows,
            )
    _write_flat_reports(report.rows, report.provenance, out)


def _write_flat_reports(rows: list[RunMetrics], provenance: dict, out: Path) -> None:
    _write_csv(out / "metrics.csv", METRICS_HEADER, _metrics_rows(rows))

    by_condition = {m.label.condition: m for m in rows}
    predictive = [m for m in sorted(rows, key=_row_sort_key) if m.label.strategy == "predictive"]

    fig2 = [
        [_fmt(m.label.fp_rate), _fmt(m.label.fn_rate), m.label.bounds, str(m.label.seed),
         _fmt(m.total_energy_kwh), _fmt(m.accuracy_room_mean)]
        for m in predictive
    ]
    _write_csv(out / "figure2.csv",
               ["fp_rate", "fn_rate", "bounds", "seed", "energy_kwh", "accuracy_room_mean"],
               fig2)

    fig3 = []
    for m in predictive:
        seed = m.label.seed
        reactive = by_condition.get(f"reactive_small_seed{seed}")
        static = by_condition.get(f"static_large_seed{seed}")
        fig3.append([
            _fmt(m.label.fp_rate), _fmt(m.label.fn_rate), m.label.bounds, str(seed),
            _fmt(m.total_energy_kwh),
            _fmt(percent_savings(m.total_energy_kwh, reactive.total_energy_kwh)) if reactive else "",
            _fmt(percent_savings(m.total_energy_kwh, static.total_energy_kwh)) if static else "",
        ])
    _write_csv(out / "figure3.csv",
               ["fp_rate", "fn_rate", "bounds", "seed", "energy_kwh",
                "savings_vs_reactive_pct", "savings_vs_static_pct"],
               fig3)

    fig4 = [
        [m.label.condition, m.label.strategy, _fmt(m.label.fp_rate), _fmt(m.label.fn_rate),
         m.label.bounds, str(m.label.seed), _fmt(m.misstime_avg_daily_min),
         _fmt(m.misstime_sd_daily_min), _fmt(m.misstime_pooled_daily_min)]
        for m in sorted(rows, key=_row_sort_key)
    ]
    _write_csv(out / "figure4.csv",
               ["condition", "strategy", "fp_rate", "fn_rate", "bounds", "seed",
                "misstime_avg_daily_min", "misstime_sd_daily_min", "misstime_pooled_daily_min"],
               fig4)

    rates_rows = []
    for m in sorted(rows, key=_row_sort_key):
        if not m.room_rates:
            continue
        for room_id in sorted(m.room_rates):
            r = m.room_rates[room_id]
            occ = r.n_truth_occ / r.n_pred if r.n_pred else 0.0
            rates_rows.append([
                m.label.condition, room_id, _fmt(r.fp_rate), _fmt(r.fn_rate),
                _fmt(r.accuracy), _fmt(occ),
            ])
    _write_csv(out / "rates_report.csv",
               ["condition", "room_id", "fp_rate", "fn_rate", "accuracy", "occ_fraction"],
               rates_rows)

    manifest = {
        "provenance": provenance,
        "files": _hash_files(out),
    }
    with (out / "manifest.json").open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _hash_files(out: Path) -> dict[str, str]:
    hashes = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            rel = path.relative_to(out).as_posix()
            hashes[rel] = hashlib.sha256(path.read_bytes()).hexdigest()
    return hashes


def _parse_rate(raw: dict, room_id: str) -> RateReport | None:
    if raw["tp"] == "":
        return None
    tp, tn, fp, fn = (int(raw[k]) for k in ("tp", "tn", "fp", "fn"))
    n_occ, n_unocc = tp + fn, tn + fp
    n_pred = tp + tn + fp + fn
    return RateReport(
        room_id=room_id,
        fp_rate=fp / n_unocc if n_unocc else 0.0,
        fn_rate=fn / n_occ if n_occ else 0.0,
        accuracy=(tp + tn) / n_pred if n_pred else 0.0,
        n_pred=n_pred,
        n_truth_occ=n_occ,
        n_truth_unocc=n_unocc,
        tp=tp, tn=tn, fp=fp, fn=fn,
    )


def load_raw_results(out_dir: str | Path) -> list[RunMetrics]:
    """Rebuild every condition's RunMetrics from the persisted raw files."""
    out = Path(out_dir)
    raw = out / "raw"
    if not raw.is_dir():
        raise EmptyInputError(f"no raw/ directory under {out}")
    rows: list[RunMetrics] = []
    for cdir in sorted(raw.iterdir()):
        if not cdir.is_dir():
            continue
        meta = json.loads((cdir / "condition.json").read_text())
        label = RunLabel(
            strategy=meta["strategy"],
            bounds=meta["bounds"],
            seed=meta["seed"],
            fp_rate=meta["fp_rate"],
            fn_rate=meta["fn_rate"],
        )
        records = []
        for room_file in sorted(cdir.glob("*.csv")):
            with room_file.open(newline="") as fh:
                reader = csv.DictReader(fh)
                monthly: dict[str, float] = {}
                mt = occ = 0.0
                rate_raw = None
                room_id = room_file.stem
                for row in reader:
                    room_id = row["room_id"]
                    monthly[row["month"]] = float(row["energy_kwh"])
                    mt = float(row["misstime_daily_min"])
                    occ = float(row["occ_fraction"])
                    rate_raw = row
            records.append(
                RoomRecord(
                    room_id=room_id,
                    monthly_energy_kwh=dict(sorted(monthly.items())),
                    misstime_daily_min=mt,
                    occ_fraction=occ,
                    rate=_parse_rate(rate_raw, room_id) if rate_raw else None,
                )
            )
        rows.append(aggregate_records(label, records))
    return rows


def regenerate_reports(out_dir: str | Path) -> None:
    """Recompute the flat report files from raw/; output is byte-identical."""
    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.is_file():
        raise EmptyInputError(f"no manifest.json under {out}")
    provenance = json.loads(manifest_path.read_text())["provenance"]
    rows = load_raw_results(out)
    _write_flat_reports(rows, provenance, out)
