"""Command-line interface: synth, simulate, sweep, export, report."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, config
from .control import Strategy, build_schedule
from .errors import ConfigError, OccusimError
from .harness import (
    SweepReport,
    SweepSpec,
    export_schedules,
    regenerate_reports,
    run_condition,
    run_sweep,
    write_report_files,
)
from .metrics import RunLabel
from .predictor import ErrorModel, oracle_predictions, place_errors
from .stats import compute_slot_weights
from .trace import load_occupancy, load_weather, save_occupancy, save_weather, synth_occupancy


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="occusim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"occusim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, data: bool = True) -> None:
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for anything stochastic (overrides config)")
        if data:
            p.add_argument("--data", default=None,
                           help="directory with occupancy.csv/weather.csv "
                                "(default: synthesize from config)")

    p = sub.add_parser("synth", help="generate synthetic occupancy and weather CSVs")
    add_common(p, data=False)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="run a single condition")
    add_common(p)
    p.add_argument("--strategy", required=True,
                   choices=("predictive", "reactive", "static", "always_on"))
    p.add_argument("--bounds", required=True, help="bounds policy name (e.g. small)")
    p.add_argument("--fp", type=float, default=None, help="false positive rate target")
    p.add_argument("--fn", type=float, default=None, help="false negative rate target")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="run the full condition grid plus baselines")
    add_common(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export", help="export setpoint schedule files for external tools")
    add_common(p)
    p.add_argument("--strategy", required=True,
                   choices=("predictive", "reactive", "static", "always_on"))
    p.add_argument("--bounds", required=True)
    p.add_argument("--fp", type=float, default=None)
    p.add_argument("--fn", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="regenerate report CSVs from persisted raw results")
    p.add_argument("--out", required=True, help="sweep output directory (holds raw/)")
    return parser


def _load_inputs(cfg: dict, args) -> tuple:
    """Traces and weather either from --data or synthesized from config."""
    if getattr(args, "data", None):
        data = Path(args.data)
        traces = load_occupancy(data / "occupancy.csv")
        weather = load_weather(data / "weather.csv", grid_hint=traces[0].grid)
        return traces, weather
    if args.seed is None and "seed" not in cfg.get("occupancy", {}):
        raise ConfigError("synthesis is stochastic: pass --seed or set occupancy.seed")
    occ_cfg = config.occupancy_config(cfg, seed=args.seed)
    traces = synth_occupancy(occ_cfg)
    weather = config.make_weather(cfg, occ_cfg, seed=args.seed)
    return traces, weather


def _error_model_for(args, spec: SweepSpec) -> ErrorModel:
    if args.fp is None or args.fn is None:
        raise ConfigError("predictive strategy needs --fp and --fn")
    if args.seed is None:
        raise ConfigError("predictive error placement is stochastic: pass --seed")
    return ErrorModel(
        fp_rate_target=args.fp,
        fn_rate_target=args.fn,
        lookahead_minutes=spec.lookahead_minutes,
        cluster_min_minutes=spec.cluster_min_minutes,
        cluster_max_minutes=spec.cluster_max_minutes,
        seed=args.seed,
    )


def _cmd_synth(args) -> int:
    cfg = config.load_config_file(args.config)
    traces, weather = _load_inputs(cfg, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_occupancy(traces, out / "occupancy.csv")
    save_weather(weather, out / "weather.csv")
    print(f"wrote {len(traces)} rooms x {traces[0].grid.n_steps} steps to {out}")
    return 0


def _cmd_simulate(args) -> int:
    cfg = config.load_config_file(args.config)
    spec = config.sweep_spec(cfg, [args.seed] if args.seed is not None else None)
    traces, weather = _load_inputs(cfg, args)
    if args.bounds not in spec.bounds_catalog:
        raise ConfigError(f"unknown bounds {args.bounds!r}")
    model = None
    label_seed = args.seed if args.seed is not None else 0
    label = RunLabel(args.strategy, args.bounds, label_seed, fp_rate=args.fp, fn_rate=args.fn)
    if args.strategy == "predictive":
        model = _error_model_for(args, spec)
    metrics_row, records = run_condition(
        label,
        traces,
        weather,
        spec.bounds_catalog[args.bounds],
        backend=spec.backend,
        thermal_params=config.thermal_params(cfg),
        proxy_params=config.proxy_params(cfg),
        comfort=spec.comfort,
        error_model=model,
        static_window=spec.static_window,
    )
    report = SweepReport(
        spec=spec,
        rows=[metrics_row],
        records={label.condition: records},
        provenance={"version": __version__, "single_condition": label.condition},
    )
    write_report_files(report, args.out)
    print(
        f"{label.condition}: {metrics_row.total_energy_kwh:.1f} kWh, "
        f"MissTime {metrics_row.misstime_avg_daily_min:.1f} min/day"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = config.load_config_file(args.config)
    seeds = [args.seed] if args.seed is not None else None
    if seeds is None and "seeds" not in cfg.get("sweep", {}):
        raise ConfigError("sweeps are stochastic: pass --seed or set sweep.seeds")
    spec = config.sweep_spec(cfg, seeds)
    traces, weather = _load_inputs(cfg, args)
    report = run_sweep(
        spec, traces, weather,
        thermal_params=config.thermal_params(cfg),
        proxy_params=config.proxy_params(cfg),
    )
    write_report_files(report, args.out)
    print(f"{len(report.rows)} conditions written to {args.out}")
    return 0


def _cmd_export(args) -> int:
    cfg = config.load_config_file(args.config)
    spec = config.sweep_spec(cfg, [args.seed] if args.seed is not None else None)
    traces, weather = _load_inputs(cfg, args)
    del weather  # schedules depend only on occupancy
    if args.bounds not in spec.bounds_catalog:
        raise ConfigError(f"unknown bounds {args.bounds!r}")
    bounds = spec.bounds_catalog[args.bounds]
    strategy = {
        "predictive": Strategy.predictive(),
        "reactive": Strategy.reactive(),
        "static": Strategy.static(spec.static_window),
        "always_on": Strategy.always_on(),
    }[args.strategy]
    model = _error_model_for(args, spec) if args.strategy == "predictive" else None
    schedules = []
    for trace in sorted(traces, key=lambda t: t.room_id):
        pred = None
        if model is not None:
            oracle = oracle_predictions(trace, model.lookahead_minutes)
            pred = place_errors(oracle, trace, compute_slot_weights(trace), model)
        schedules.append(build_schedule(strategy, trace, pred, bounds))
    export_schedules(schedules, args.out)
    print(f"exported {len(schedules)} room schedules to {args.out}")
    return 0


def _cmd_report(args) -> int:
    regenerate_reports(args.out)
    print(f"report files regenerated under {args.out}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "export": _cmd_export,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit 2
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OccusimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
