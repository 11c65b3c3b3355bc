"""Rolling-horizon closed loop: replan, track, archive, and score-ready records."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .disturbance import DisturbanceSpec, RandomStream
from .domain import Plan, TIME_EPS, Trajectory
from .plant import init_plant, measure, step
from .scenario import ScenarioConfig, validate
from .signals import Phase, SignalTimeline, observe, phase_at
from .stopgo import StopGoController


class EpisodeAborted(RuntimeError):
    """An episode violated a hard constraint or a controller failed."""


@dataclass(frozen=True)
class EpisodeRecord:
    """Everything one episode produced, ready for the metrics layer."""

    executed: Trajectory
    plan_segments: list
    realized_signal: SignalTimeline
    benchmark: Trajectory | None
    config: ScenarioConfig
    pass_time: float
    seed: int

    def with_benchmark(self, benchmark: Trajectory) -> "EpisodeRecord":
        return dataclasses.replace(self, benchmark=benchmark)


def run_episode(config: ScenarioConfig, controller, benchmark: Trajectory | None = None) -> EpisodeRecord:
    """Run one closed-loop episode at dt with replanning every replan_interval.

    Between replans the command is the planned acceleration plus proportional
    speed feedback on the measured speed. Terminates at the first sample with
    x >= approach_distance + exit_distance; crossing the stop line on red or
    exceeding t_max aborts the episode.
    """
    validate(config)
    dt = config.dt
    steps_per_replan = int(round(config.replan_interval / dt))
    timeline = config.signal
    rng = RandomStream(config.seed)
    plant = init_plant(0.0, config.v0, config.disturbance)

    pass_x = config.pass_x
    x_light = config.x_light
    max_steps = int(config.t_max / dt) + 1

    ts, xs, vs, accs = [], [], [], []
    segments: list[tuple[float, Plan]] = []
    active_plan: Plan | None = None
    pass_time = None

    for k in range(max_steps + 1):
        t = k * dt
        state = plant.kinematics
        if x_light < state.x <= pass_x and phase_at(timeline, t) is Phase.RED:
            raise EpisodeAborted(f"red-phase stop line crossing at t={t:.2f}s, x={state.x:.3f} m")
        if state.x >= pass_x:
            ts.append(t)
            xs.append(state.x)
            vs.append(state.v)
            accs.append(0.0)
            pass_time = t
            break

        measured = measure(plant, config.disturbance, rng)
        if k % steps_per_replan == 0:
            obs = observe(timeline, t)
            try:
                active_plan = controller.plan(measured, obs)
            except Exception as exc:
                raise EpisodeAborted(f"controller failed at t={t:.2f}s: {exc}") from exc
            segments.append((t, active_plan))

        idx = active_plan.index_at(t)
        a_plan = float(active_plan.traj.a[idx])
        v_plan = float(active_plan.traj.v[idx])
        a_cmd = a_plan + config.feedback_gain * (v_plan - measured.v)

        step(plant, a_cmd, config.disturbance, config.limits, dt, rng)
        ts.append(t)
        xs.append(state.x)
        vs.append(state.v)
        accs.append(plant.applied_accel)

    if pass_time is None:
        raise EpisodeAborted("episode did not terminate within t_max")

    executed = Trajectory(ts, xs, vs, accs, dt)
    return EpisodeRecord(
        executed=executed,
        plan_segments=segments,
        realized_signal=timeline,
        benchmark=benchmark,
        config=config,
        pass_time=pass_time,
        seed=config.seed,
    )


def benchmark_episode(config: ScenarioConfig) -> Trajectory:
    """Stop-and-go run under the realized signal with a disturbance-free plant.

    The benchmark is the normalization baseline, so it observes the realized
    timeline from the start (the announcement mechanism only disturbs the
    controllers under evaluation); this keeps the denominator deterministic
    per scenario.
    """
    clean = dataclasses.replace(
        config,
        disturbance=DisturbanceSpec(),
        signal=dataclasses.replace(config.signal, announce_at=0.0),
    )
    record = run_episode(clean, StopGoController.from_scenario(clean))
    return record.executed


def write_episode_log(record: EpisodeRecord, path) -> None:
    """Line-delimited log: one JSON object per executed sample."""
    issues = [issued_at for issued_at, _plan in record.plan_segments]
    with open(path, "w") as fh:
        for i in range(len(record.executed)):
            t = float(record.executed.t[i])
            plan_id = int(np.searchsorted(issues, t + TIME_EPS) - 1) if issues else -1
            row = {
                "t": round(t, 6),
                "x": round(float(record.executed.x[i]), 6),
                "v": round(float(record.executed.v[i]), 6),
                "a": round(float(record.executed.a[i]), 6),
                "phase": phase_at(record.realized_signal, t).value,
                "active_plan_id": plan_id,
            }
            fh.write(json.dumps(row) + "\n")
