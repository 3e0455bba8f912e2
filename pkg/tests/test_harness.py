"""Sweep orchestration, report files, schedule export, CLI."""

import csv
import hashlib
import json

import numpy as np
import pytest

from occusim import (
    RunLabel,
    Strategy,
    SweepSpec,
    build_schedule,
    export_schedules,
    load_raw_results,
    load_schedule_file,
    percent_savings,
    regenerate_reports,
    run_condition,
    run_sweep,
    sensitivity_table,
    standard_bounds,
    write_report_files,
    synth_occupancy,
)
from occusim.cli import main as cli_main
from occusim.errors import ConfigError, InsufficientGridError
from occusim.trace import university_office_preset, winter_preset

from helpers import make_grid, trace_from_windows


@pytest.fixture(scope="module")
def small_inputs():
    traces = synth_occupancy(university_office_preset(n_rooms=4, n_days=14, seed=3))
    weather = winter_preset(n_days=14, seed=3)
    return traces, weather


@pytest.fixture(scope="module")
def small_report(small_inputs):
    traces, weather = small_inputs
    spec = SweepSpec(fp_rates=(0.25, 0.05), fn_rates=(0.25, 0.05),
                     bounds_names=("small", "large"), seeds=(1, 2))
    return run_sweep(spec, traces, weather)


def test_grid_arithmetic():
    spec = SweepSpec(fp_rates=(0.15,), fn_rates=(0.15,), bounds_names=("small",))
    assert spec.n_conditions_per_seed == 3
    assert SweepSpec().n_conditions_per_seed == 29


def test_sweep_condition_completeness(small_report):
    conditions = [m.label.condition for m in small_report.rows]
    assert len(conditions) == len(set(conditions))
    assert len(conditions) == (2 * 2 * 2 + 2) * 2  # grid + baselines, two seeds
    for seed in (1, 2):
        assert f"reactive_small_seed{seed}" in conditions
        assert f"static_large_seed{seed}" in conditions


def test_sweep_rows_deterministic(small_inputs):
    traces, weather = small_inputs
    spec = SweepSpec(fp_rates=(0.15,), fn_rates=(0.15,), bounds_names=("small",), seeds=(5,))
    a = run_sweep(spec, traces, weather)
    b = run_sweep(spec, traces, weather)
    for ma, mb in zip(a.rows, b.rows):
        assert ma.label == mb.label
        assert ma.total_energy_kwh == mb.total_energy_kwh
        assert ma.per_room_misstime == mb.per_room_misstime


def test_written_tree_byte_identical(small_inputs, tmp_path):
    traces, weather = small_inputs
    spec = SweepSpec(fp_rates=(0.25,), fn_rates=(0.05,), bounds_names=("small",), seeds=(4,))
    for d in ("x", "y"):
        write_report_files(run_sweep(spec, traces, weather), tmp_path / d)
    files_x = sorted(p.relative_to(tmp_path / "x") for p in (tmp_path / "x").rglob("*") if p.is_file())
    files_y = sorted(p.relative_to(tmp_path / "y") for p in (tmp_path / "y").rglob("*") if p.is_file())
    assert files_x == files_y
    for rel in files_x:
        assert (tmp_path / "x" / rel).read_bytes() == (tmp_path / "y" / rel).read_bytes(), rel


def test_report_regeneration_byte_identical(small_report, tmp_path):
    write_report_files(small_report, tmp_path)
    before = {p: p.read_bytes() for p in tmp_path.rglob("*.csv")}
    regenerate_reports(tmp_path)
    after = {p: p.read_bytes() for p in tmp_path.rglob("*.csv")}
    assert before == after
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    for rel, digest in manifest["files"].items():
        assert hashlib.sha256((tmp_path / rel).read_bytes()).hexdigest() == digest


def test_raw_roundtrip_reproduces_rows(small_report, tmp_path):
    write_report_files(small_report, tmp_path)
    rebuilt = {m.label.condition: m for m in load_raw_results(tmp_path)}
    assert set(rebuilt) == {m.label.condition for m in small_report.rows}
    for m in small_report.rows:
        r = rebuilt[m.label.condition]
        assert r.total_energy_kwh == m.total_energy_kwh
        assert r.misstime_avg_daily_min == m.misstime_avg_daily_min
        assert r.misstime_sd_daily_min == m.misstime_sd_daily_min
        if m.rates_pooled:
            assert r.rates_pooled == m.rates_pooled


def test_savings_rows_recompute_exactly(small_report, tmp_path):
    write_report_files(small_report, tmp_path)
    energies = {}
    with (tmp_path / "metrics.csv").open(newline="") as fh:
        for row in csv.DictReader(fh):
            energies[row["condition"]] = float(row["total_energy_kwh"])
    with (tmp_path / "figure3.csv").open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows
    for row in rows:
        cond = (f"predictive_fp{float(row['fp_rate']):g}_fn{float(row['fn_rate']):g}_"
                f"{row['bounds']}_seed{row['seed']}")
        expect = percent_savings(energies[cond], energies[f"reactive_small_seed{row['seed']}"])
        assert float(row["savings_vs_reactive_pct"]) == expect
        expect = percent_savings(energies[cond], energies[f"static_large_seed{row['seed']}"])
        assert float(row["savings_vs_static_pct"]) == expect


def test_sensitivity_table_matches_hand_computation(small_report):
    rows = sensitivity_table(small_report)
    predictive = [m for m in small_report.rows if m.label.strategy == "predictive"]
    hi = np.mean([m.total_energy_kwh for m in predictive if m.label.fp_rate == 0.25])
    lo = np.mean([m.total_energy_kwh for m in predictive if m.label.fp_rate == 0.05])
    fp_row = next(r for r in rows if r.rate_kind == "fp")
    assert fp_row.absolute_delta == pytest.approx(hi - lo)
    assert fp_row.percent_delta == pytest.approx(100.0 * (hi - lo) / hi)
    fn_rows = [r for r in rows if r.rate_kind == "fn"]
    assert len(fn_rows) == 1
    assert fn_rows[0].quantity == "misstime_min"


def test_sensitivity_constant_grid_gives_zero_deltas(small_report):
    from dataclasses import replace
    rows = [replace(m, total_energy_kwh=100.0, misstime_avg_daily_min=5.0)
            for m in small_report.rows]
    report = type(small_report)(spec=small_report.spec, rows=rows, records={}, provenance={})
    for r in sensitivity_table(report):
        assert r.absolute_delta == 0.0 and r.percent_delta == 0.0


def test_sensitivity_requires_two_levels(small_inputs):
    traces, weather = small_inputs
    spec = SweepSpec(fp_rates=(0.15,), fn_rates=(0.15,), bounds_names=("small",), seeds=(1,))
    with pytest.raises(InsufficientGridError):
        sensitivity_table(run_sweep(spec, traces, weather))


def test_run_condition_requires_model_for_predictive(small_inputs):
    traces, weather = small_inputs
    with pytest.raises(ConfigError):
        run_condition(RunLabel("predictive", "small", 0, 0.1, 0.1), traces, weather,
                      standard_bounds()["small"])


# ---------------------------------------------------------------------------
# Schedule export
# ---------------------------------------------------------------------------

def test_export_line_counts_and_constant_values(tmp_path):
    grid = make_grid(1)
    trace = trace_from_windows(grid, [(0, 1440)])
    sched = build_schedule(Strategy.reactive(), trace, None, standard_bounds()["small"])
    export_schedules([sched], tmp_path)
    heat_lines = (tmp_path / "roomA_heating.txt").read_text().splitlines()
    assert len(heat_lines) == 288  # 1440 / 5
    assert all(line == "20.0" for line in heat_lines)


def test_export_round_trip_exact(tmp_path):
    traces = synth_occupancy(university_office_preset(n_rooms=2, n_days=7, seed=1))
    bounds = standard_bounds()["medium"]
    schedules = [build_schedule(Strategy.reactive(), t, None, bounds) for t in traces]
    manifest = export_schedules(schedules, tmp_path)
    for sched in schedules:
        files = manifest["rooms"][sched.room_id]
        assert np.array_equal(load_schedule_file(tmp_path / files["heating"]), sched.heat_sp_c)
        assert np.array_equal(load_schedule_file(tmp_path / files["cooling"]), sched.cool_sp_c)
    meta = json.loads((tmp_path / "schedules_manifest.json").read_text())
    assert meta["n_steps"] == traces[0].grid.n_steps
    assert meta["step_minutes"] == 5


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

CONFIG_SMALL = """
[occupancy]
preset = "university_office"
n_rooms = 3
n_days = 14

[weather]
preset = "winter"

[sweep]
fp_rates = [0.25, 0.05]
fn_rates = [0.05]
bounds = ["small", "large"]
seeds = [3]
"""


@pytest.fixture()
def config_file(tmp_path):
    p = tmp_path / "config.toml"
    p.write_text(CONFIG_SMALL)
    return p


def test_cli_missing_config_exits_2(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli_main(["sweep", "--config", str(tmp_path / "nope.toml"), "--seed", "1",
                     "--out", str(out)])
    assert code == 2
    assert not out.exists()  # no partial outputs
    assert "error" in capsys.readouterr().err


def test_cli_sweep_requires_seed(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[occupancy]\nn_rooms = 2\nn_days = 7\n")
    code = cli_main(["sweep", "--config", str(p), "--out", str(tmp_path / "out")])
    assert code == 2


def test_cli_synth_then_sweep_and_report(config_file, tmp_path, capsys):
    data = tmp_path / "data"
    assert cli_main(["synth", "--config", str(config_file), "--seed", "3",
                     "--out", str(data)]) == 0
    assert (data / "occupancy.csv").is_file() and (data / "weather.csv").is_file()

    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    for out in (out1, out2):
        assert cli_main(["sweep", "--config", str(config_file), "--seed", "3",
                         "--data", str(data), "--out", str(out)]) == 0
    rel = lambda root: {p.relative_to(root).as_posix(): p.read_bytes()
                        for p in root.rglob("*") if p.is_file()}
    assert rel(out1) == rel(out2)

    with (out1 / "metrics.csv").open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 1 * 2 + 2

    before = rel(out1)
    assert cli_main(["report", "--out", str(out1)]) == 0
    assert rel(out1) == before


def test_cli_simulate_single_condition(config_file, tmp_path):
    out = tmp_path / "run"
    assert cli_main(["simulate", "--config", str(config_file), "--seed", "3",
                     "--strategy", "reactive", "--bounds", "small", "--out", str(out)]) == 0
    with (out / "metrics.csv").open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert rows[0]["condition"] == "reactive_small_seed3"


def test_cli_simulate_predictive_needs_rates_and_seed(config_file, tmp_path):
    code = cli_main(["simulate", "--config", str(config_file), "--seed", "3",
                     "--strategy", "predictive", "--bounds", "small",
                     "--out", str(tmp_path / "x")])
    assert code == 2


def test_cli_export(config_file, tmp_path):
    out = tmp_path / "sched"
    assert cli_main(["export", "--config", str(config_file), "--seed", "3",
                     "--strategy", "predictive", "--bounds", "small",
                     "--fp", "0.15", "--fn", "0.15", "--out", str(out)]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert "schedules_manifest.json" in files
    heating = [f for f in files if f.endswith("_heating.txt")]
    assert len(heating) == 3
    assert len(load_schedule_file(out / heating[0])) == 14 * 288


def test_cli_usage_error_exit_code():
    assert cli_main(["simulate", "--strategy", "reactive"]) == 2  # missing required args


def test_schedule_csv_dump(tmp_path):
    from occusim import save_schedule_csv

    grid = make_grid(1)
    trace = trace_from_windows(grid, [(540, 1020)])
    sched = build_schedule(Strategy.reactive(), trace, None, standard_bounds()["medium"])
    out = tmp_path / "schedule.csv"
    save_schedule_csv(sched, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "timestamp,heat_sp_c,cool_sp_c,conditioned"
    assert len(lines) == 1 + grid.n_steps
    row = lines[1 + 540 // 5].split(",")  # first occupied step
    assert (float(row[1]), float(row[2]), row[3]) == (20.0, 24.0, "1")
    row = lines[1].split(",")  # midnight: setback pair
    assert (float(row[1]), float(row[2]), row[3]) == (14.0, 30.0, "0")
