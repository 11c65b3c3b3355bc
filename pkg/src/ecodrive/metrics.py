"""Fuel, utility, tracking error, and retention-ratio indicators.

The utility is defined slice-wise: every sample contributes
``-w1*dt`` while the vehicle has not yet passed ``pass_x`` and ``-w2`` times
its fuel slice always. That makes utility exactly additive over interval
partitions, which the retention indicators rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .disturbance import _align
from .domain import FuelCoefficients, TIME_EPS, Trajectory, UtilityWeights


def fuel_rate(v: float, a: float, c: FuelCoefficients) -> float:
    """Instantaneous burn rate, floored at zero."""
    r = c.alpha + c.beta * v + c.gamma * v * v + c.theta * v * a + c.eta * a * a
    return r if r > 0.0 else 0.0


def _rates(traj: Trajectory, c: FuelCoefficients) -> np.ndarray:
    v = traj.v
    a = traj.a
    r = c.alpha + c.beta * v + c.gamma * v * v + c.theta * v * a + c.eta * a * a
    return np.maximum(r, 0.0)


def energy(traj: Trajectory, c: FuelCoefficients) -> float:
    """Left Riemann sum of the burn rate; every sample owns one dt slice."""
    return float(np.sum(_rates(traj, c)) * traj.dt)


def utility(traj: Trajectory, w: UtilityWeights, c: FuelCoefficients, pass_x: float) -> float:
    """Combined time/energy utility; higher is better, always negative."""
    not_passed = traj.x < pass_x
    time_term = w.w1 * traj.dt * float(np.count_nonzero(not_passed))
    return -time_term - w.w2 * energy(traj, c)


def rmse(executed: Trajectory, planned_concat: Trajectory) -> float:
    """Root mean square position deviation over the common timestamps."""
    i0, j0, n = _align(executed, planned_concat)
    d = executed.x[i0 : i0 + n] - planned_concat.x[j0 : j0 + n]
    return float(np.sqrt(np.mean(d * d)))


def concat_plan_prefixes(segments, delta: float) -> Trajectory:
    """Stitch the first-delta window of each archived plan into one trajectory.

    Segment i contributes its samples in [t_i, t_i + delta); the final
    segment also contributes the sample at t_last + delta, closing the
    piecewise planned reference.
    """
    if not segments:
        raise ValueError("no plan segments to concatenate")
    parts_t, parts_x, parts_v, parts_a = [], [], [], []
    prev_issue = None
    for idx, (issued_at, plan) in enumerate(segments):
        if abs(plan.issued_at - issued_at) > TIME_EPS:
            raise ValueError("segment issue times disagree with their plans")
        if prev_issue is not None and abs(issued_at - prev_issue - delta) > TIME_EPS:
            raise ValueError("gap or overlap in plan segment coverage")
        prev_issue = issued_at
        traj = plan.traj
        last = idx == len(segments) - 1
        hi = issued_at + delta + (TIME_EPS if last else -TIME_EPS)
        mask = (traj.t >= issued_at - TIME_EPS) & (traj.t <= hi)
        if not np.any(mask):
            raise ValueError("gap or overlap in plan segment coverage")
        parts_t.append(traj.t[mask])
        parts_x.append(traj.x[mask])
        parts_v.append(traj.v[mask])
        parts_a.append(traj.a[mask])
    dt = segments[0][1].traj.dt
    return Trajectory(
        np.concatenate(parts_t),
        np.concatenate(parts_x),
        np.concatenate(parts_v),
        np.concatenate(parts_a),
        dt,
    )


def indicator(u_exec: float, u_bench: float, u_planned_concat: float) -> float:
    """Retention ratio (u_exec - u_bench) / (u_planned - u_bench).

    Reads as robustness R when only internal disturbances acted and as
    resilience G when external ones did too; values above 1 are legitimate.
    """
    denom = u_planned_concat - u_bench
    if denom == 0.0:
        raise ValueError("planner indistinguishable from benchmark (zero denominator)")
    return (u_exec - u_bench) / denom


@dataclass(frozen=True)
class IndicatorReport:
    """One scored episode, mirroring the evaluation-table columns."""

    u_executed: float
    u_benchmark: float
    u_planned_concat: float
    rmse_m: float
    indicator: float
    pass_time_s: float
    energy_l: float

    def csv_row(self, scenario: str, method: str) -> str:
        return (
            f"{scenario},{method},{self.u_executed:.6f},{self.u_benchmark:.6f},"
            f"{self.u_planned_concat:.6f},{self.rmse_m:.6f},{self.indicator:.6f}"
        )


def evaluate_episode(record) -> IndicatorReport:
    """Score one EpisodeRecord against its benchmark trajectory.

    The planned reference is the concatenation of plan prefixes trimmed to the
    executed support so both utilities cover the same interval.
    """
    if record.benchmark is None:
        raise ValueError("record has no benchmark trajectory attached")
    cfg = record.config
    pass_x = cfg.approach_distance + cfg.exit_distance
    executed = record.executed
    concat = concat_plan_prefixes(record.plan_segments, cfg.replan_interval)
    concat_trimmed = concat.window(executed.t[0], min(executed.t[-1], concat.t[-1]))

    u_exec = utility(executed, cfg.weights, cfg.fuel, pass_x)
    u_plan = utility(concat_trimmed, cfg.weights, cfg.fuel, pass_x)
    u_bench = utility(record.benchmark, cfg.weights, cfg.fuel, pass_x)
    return IndicatorReport(
        u_executed=u_exec,
        u_benchmark=u_bench,
        u_planned_concat=u_plan,
        rmse_m=rmse(executed, concat),
        indicator=indicator(u_exec, u_bench, u_plan),
        pass_time_s=record.pass_time,
        energy_l=energy(executed, cfg.fuel),
    )
