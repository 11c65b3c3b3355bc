"""Batch front end: controller x extension x disturbance matrix with CSV reports."""

from __future__ import annotations

import dataclasses
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytical import AnalyticalController
from .disturbance import DisturbanceSpec
from .executor import EpisodeAborted, benchmark_episode, run_episode, write_episode_log
from .metrics import IndicatorReport, evaluate_episode, utility
from .optimal import OptimalController
from .scenario import ScenarioConfig, default_config, validate
from .stopgo import StopGoController

RESULTS_HEADER = "scenario,method,U_J,U_JB,U_Jstar,RMSE_m,indicator"
SUMMARY_HEADER = "method,extension_s,internal_level,kind,n,indicator_mean,indicator_std,rmse_mean,rmse_std"

INTERNAL_LEVELS = {
    "none": DisturbanceSpec(),
    "mild": DisturbanceSpec(
        actuator_tau=0.2, command_delay_steps=1, accel_noise_sigma=0.03, measurement_noise_sigma_v=0.01
    ),
    "heavy": DisturbanceSpec(
        actuator_tau=0.3, command_delay_steps=1, accel_noise_sigma=0.08, measurement_noise_sigma_v=0.03
    ),
}

_CONTROLLERS = {
    "stopgo": StopGoController.from_scenario,
    "analytical": AnalyticalController.from_scenario,
    "optimal": OptimalController.from_scenario,
}


def make_controller(name: str, config: ScenarioConfig):
    try:
        factory = _CONTROLLERS[name]
    except KeyError:
        raise ValueError(f"unknown controller '{name}'") from None
    return factory(config)


@dataclass(frozen=True)
class ExperimentMatrix:
    """Cartesian run grid over controllers, extensions, levels, and seeds."""

    controllers: tuple = ("analytical", "optimal")
    extensions_s: tuple = (0.0, 2.0, 4.0, 6.0)
    internal_levels: tuple = ("none", "mild", "heavy")
    repetitions: int = 5
    base_config: ScenarioConfig = field(default_factory=default_config)
    output_dir: str = "out"

    def check(self) -> None:
        if not self.controllers:
            raise ValueError("matrix needs at least one controller")
        if not self.extensions_s:
            raise ValueError("matrix needs at least one extension")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for name in self.controllers:
            if name not in _CONTROLLERS:
                raise ValueError(f"unknown controller '{name}'")
        for level in self.internal_levels:
            if level not in INTERNAL_LEVELS:
                raise ValueError(f"unknown internal level '{level}'")
        validate(self.base_config)


def cell_config(base: ScenarioConfig, extension_s: float, level: str, rep: int) -> ScenarioConfig:
    return dataclasses.replace(
        base,
        signal=dataclasses.replace(base.signal, extension_s=float(extension_s)),
        disturbance=INTERNAL_LEVELS[level],
        seed=base.seed + rep,
    )


def indicator_kind(extension_s: float, spec: DisturbanceSpec) -> str:
    return "R" if extension_s == 0.0 and not spec.is_zero else "G"


@dataclass
class RunOutcome:
    scenario: str
    method: str
    extension_s: float
    level: str
    rep: int
    report: IndicatorReport | None
    record: object | None
    error: str | None


def _run_cell(args) -> RunOutcome:
    controller_name, extension_s, level, rep, base = args
    scenario_id = f"ext{extension_s:g}-{level}-r{rep}"
    cfg = cell_config(base, extension_s, level, rep)
    try:
        bench = benchmark_episode(cfg)
        controller = make_controller(controller_name, cfg)
        record = run_episode(cfg, controller, benchmark=bench)
        report = evaluate_episode(record)
        return RunOutcome(scenario_id, controller_name, extension_s, level, rep, report, record, None)
    except Exception as exc:  # failures become recorded rows, never silent drops
        detail = f"{type(exc).__name__}: {exc}"
        if not isinstance(exc, EpisodeAborted):
            detail += " | " + traceback.format_exc(limit=3).replace("\n", " ")
        return RunOutcome(scenario_id, controller_name, extension_s, level, rep, None, None, detail)


@dataclass
class MatrixResult:
    outcomes: list
    benchmark_utilities: dict

    @property
    def failures(self):
        return [o for o in self.outcomes if o.error is not None]

    @property
    def ok(self) -> bool:
        return not self.failures


def run_matrix(matrix: ExperimentMatrix, workers: int = 1) -> MatrixResult:
    """Run every (controller, extension, level, repetition) cell.

    Cells are independent; with workers > 1 they run in a process pool. Rows
    are sorted before reporting so output never depends on completion order.
    """
    matrix.check()
    tasks = [
        (controller, ext, level, rep, matrix.base_config)
        for controller in matrix.controllers
        for ext in matrix.extensions_s
        for level in matrix.internal_levels
        for rep in range(matrix.repetitions)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, tasks))
    else:
        outcomes = [_run_cell(task) for task in tasks]
    outcomes.sort(key=lambda o: (o.method, o.extension_s, o.level, o.rep))

    bench_utils = {}
    for ext in matrix.extensions_s:
        cfg = cell_config(matrix.base_config, ext, "none", 0)
        try:
            bench = benchmark_episode(cfg)
        except EpisodeAborted:
            continue  # the per-cell rows already carry the failure
        bench_utils[float(ext)] = utility(bench, cfg.weights, cfg.fuel, cfg.pass_x)
    return MatrixResult(outcomes=outcomes, benchmark_utilities=bench_utils)


def _summaries(result: MatrixResult):
    cells = {}
    for o in result.outcomes:
        if o.report is None:
            continue
        cells.setdefault((o.method, o.extension_s, o.level), []).append(o.report)
    rows = []
    for (method, ext, level), reports in sorted(cells.items()):
        kind = indicator_kind(ext, INTERNAL_LEVELS[level])
        ind = np.array([r.indicator for r in reports])
        rms = np.array([r.rmse_m for r in reports])
        rows.append(
            f"{method},{ext:g},{level},{kind},{len(reports)},"
            f"{ind.mean():.6f},{ind.std():.6f},{rms.mean():.6f},{rms.std():.6f}"
        )
    return rows


def emit_report(result: MatrixResult, output_dir) -> dict:
    """Write results.csv, summary.csv, per-episode logs, and failures.csv."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    lines = [RESULTS_HEADER]
    for o in result.outcomes:
        if o.report is not None:
            lines.append(o.report.csv_row(o.scenario, o.method))
    for ext in sorted(result.benchmark_utilities):
        u = result.benchmark_utilities[ext]
        lines.append(f"ext{ext:g}-benchmark,stopgo,{u:.6f},{u:.6f},,,")
    results_path = out / "results.csv"
    results_path.write_text("\n".join(lines) + "\n")

    summary_path = out / "summary.csv"
    summary_path.write_text("\n".join([SUMMARY_HEADER] + _summaries(result)) + "\n")

    paths = {"results": results_path, "summary": summary_path}
    for o in result.outcomes:
        if o.record is not None:
            log_path = out / f"traj_{o.scenario}_{o.method}.jsonl"
            write_episode_log(o.record, log_path)

    if result.failures:
        fail_path = out / "failures.csv"
        fail_lines = ["scenario,method,error"]
        for o in result.failures:
            err = o.error.replace(",", ";")
            fail_lines.append(f"{o.scenario},{o.method},{err}")
        fail_path.write_text("\n".join(fail_lines) + "\n")
        paths["failures"] = fail_path
    return paths
