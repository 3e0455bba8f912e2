"""occusim: energy/comfort tradeoffs of occupancy-driven HVAC control.

Pipeline: occupancy traces (real or synthetic) -> simulated predictor output
with controlled FP/FN rates, look-ahead and clustered errors -> setpoint
schedules per control strategy and setback policy -> thermal/energy backend
-> energy and MissTime metrics, swept over a condition grid.
"""

__version__ = "0.1.0"

from .control import (
    BoundsPolicy,
    SetpointSchedule,
    Strategy,
    StrategyKind,
    build_schedule,
    standard_bounds,
)
from .errors import OccusimError
from .metrics import (
    ComfortConfig,
    ComfortMode,
    RoomRecord,
    RunLabel,
    RunMetrics,
    aggregate,
    aggregate_records,
    misstime,
    percent_savings,
)
from .predictor import (
    ErrorModel,
    PredictionTrace,
    cluster_length_stats,
    oracle_predictions,
    place_errors,
    save_predictions,
)
from .stats import (
    RateReport,
    SlotWeights,
    compute_slot_weights,
    expected_accuracy,
    measure_rates,
    occupancy_summary,
    pool_rates,
)
from .thermal import (
    DegreeMinutesParams,
    RoomThermalParams,
    SimResult,
    degree_minutes_energy,
    energy_conservation_check,
    save_thermal_trace,
    simulate_room,
)
from .trace import (
    OccupancyTrace,
    SynthOccupancyConfig,
    TimeGrid,
    WeatherSeries,
    load_occupancy,
    load_weather,
    pittsburgh_preset,
    save_occupancy,
    save_weather,
    synth_occupancy,
    synth_weather,
    university_office_preset,
    winter_preset,
)
from .harness import (
    SensitivityRow,
    SweepReport,
    SweepSpec,
    export_schedules,
    load_raw_results,
    load_schedule_file,
    regenerate_reports,
    run_condition,
    run_sweep,
    save_schedule_csv,
    sensitivity_table,
    write_report_files,
)
