"""Eco-driving simulator and robustness/resilience evaluation harness."""

from ._kernels import BACKEND, USE_NUMBA
from .analytical import (
    AnalyticalController,
    ArrivalTimes,
    CubicCoeffs,
    arrival_times,
    feasible_duration_range,
    predicted_arrival,
    solve_cubic,
)
from .disturbance import DisturbanceSpec, RandomStream, control_error_series, external_deviation
from .domain import (
    ConfigError,
    FuelCoefficients,
    Limits,
    Plan,
    PlanningError,
    Trajectory,
    UtilityWeights,
    VehicleState,
)
from .executor import EpisodeAborted, EpisodeRecord, benchmark_episode, run_episode, write_episode_log
from .experiment import ExperimentMatrix, INTERNAL_LEVELS, emit_report, run_matrix
from .metrics import (
    IndicatorReport,
    concat_plan_prefixes,
    energy,
    evaluate_episode,
    fuel_rate,
    indicator,
    rmse,
    utility,
)
from .optimal import OptimalController, SolveReport, TrajectoryProblem, build, objective_and_gradient, solve
from .oracle import DpGrid, dp_min_fuel, exhaustive_min_fuel, oracle_check, quantization_slack
from .plant import PlantState, init_plant, measure, step
from .scenario import ScenarioConfig, default_config, load_scenario, save_scenario, validate
from .signals import Phase, SignalObservation, SignalTimeline, next_green_window, observe, phase_at
from .stopgo import StopGoConfig, StopGoController

__version__ = "0.1.0"
