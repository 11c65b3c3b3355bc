"""Brute-force optima on a position/velocity lattice for validating the solver.

Cost convention matches the solver: one burn slice per step from the state
the step leaves, plus a terminal idle slice (zero acceleration) so totals are
comparable. Desk-scale guards keep table sizes and enumeration counts sane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import dp_sweep, exhaustive_scan
from .domain import Trajectory
from .optimal import TrajectoryProblem

DP_CELL_GUARD = 10**8
ENUM_GUARD = 10**7


@dataclass(frozen=True)
class DpGrid:
    """Lattice over [x0, x_goal] x [v_min, v_max] with discrete accel choices."""

    n_pos: int
    n_vel: int
    pos_step: float
    vel_step: float
    accel_options: tuple

    @classmethod
    def for_problem(
        cls,
        problem: TrajectoryProblem,
        pos_step: float = 1.0,
        vel_step: float = 0.25,
        accel_options=(-3.0, -1.5, 0.0, 1.5, 3.0),
    ) -> "DpGrid":
        lim = problem.limits
        n_pos = int(math.ceil((problem.x_goal - problem.x0) / pos_step)) + 2
        n_vel = int(math.ceil((lim.v_max - lim.v_min) / vel_step)) + 1
        for a in accel_options:
            if a < lim.a_min - 1e-12 or a > lim.a_max + 1e-12:
                raise ValueError("accel option outside the acceleration box")
        return cls(n_pos, n_vel, pos_step, vel_step, tuple(float(a) for a in accel_options))

    def positions(self, x0: float) -> np.ndarray:
        return x0 + self.pos_step * np.arange(self.n_pos)

    def velocities(self, v_min: float) -> np.ndarray:
        return v_min + self.vel_step * np.arange(self.n_vel)


def _snap(value: float, origin: float, step: float, count: int) -> int:
    idx = int((value - origin) / step + 0.5)
    if idx < 0 or idx >= count:
        raise RuntimeError("state falls outside the lattice")
    return idx


def dp_min_fuel(problem: TrajectoryProblem, grid: DpGrid):
    """Exact backward DP on the lattice; returns (cost, argmin trajectory).

    Terminal states must land within one grid cell of (x_goal, v_goal). The
    initial state is snapped to its nearest cell before the sweep.
    """
    cells = problem.n_steps * grid.n_pos * grid.n_vel
    if cells > DP_CELL_GUARD:
        raise ValueError(f"desk-scale guard exceeded: {cells} cells")
    lim = problem.limits
    c = problem.fuel
    pos = grid.positions(problem.x0)
    vel = grid.velocities(lim.v_min)
    accels = np.asarray(grid.accel_options)

    value, choice = dp_sweep(
        pos,
        vel,
        accels,
        problem.n_steps,
        problem.dt,
        c.alpha,
        c.beta,
        c.gamma,
        c.theta,
        c.eta,
        lim.v_min,
        lim.v_max,
        problem.x_goal,
        problem.v_goal,
        grid.pos_step,
        grid.vel_step,
    )

    ip = _snap(problem.x0, pos[0], grid.pos_step, grid.n_pos)
    iv = _snap(problem.v0, vel[0], grid.vel_step, grid.n_vel)
    cost = float(value[ip, iv])
    if not math.isfinite(cost):
        raise RuntimeError("no feasible lattice path to the terminal cell")

    ts, xs, vs, accs = [0.0], [float(pos[ip])], [float(vel[iv])], []
    for k in range(problem.n_steps):
        ia = int(choice[k, ip, iv])
        if ia < 0:
            raise RuntimeError("no feasible lattice path to the terminal cell")
        a = float(accels[ia])
        x2 = pos[ip] + vel[iv] * problem.dt + 0.5 * a * problem.dt * problem.dt
        v2 = vel[iv] + a * problem.dt
        ip = _snap(x2, pos[0], grid.pos_step, grid.n_pos)
        iv = _snap(v2, vel[0], grid.vel_step, grid.n_vel)
        accs.append(a)
        ts.append((k + 1) * problem.dt)
        xs.append(float(pos[ip]))
        vs.append(float(vel[iv]))
    accs.append(0.0)
    traj = Trajectory(ts, xs, vs, accs, problem.dt)
    return cost, traj


def exhaustive_min_fuel(problem: TrajectoryProblem, accel_options, grid: DpGrid | None = None, terminal_tol=None):
    """Global optimum by full enumeration of acceleration sequences.

    With ``grid`` given, states are snapped to the same lattice the DP uses
    (identical discretization, exact agreement); without it the rollout is
    continuous and ``terminal_tol = (pos_tol, vel_tol)`` must be supplied.
    """
    accels = np.asarray([float(a) for a in accel_options])
    total = len(accels) ** problem.n_steps
    if total > ENUM_GUARD:
        raise ValueError(f"enumeration guard exceeded: {total} sequences")
    lim = problem.limits
    c = problem.fuel

    if grid is not None:
        pos = grid.positions(problem.x0)
        vel = grid.velocities(lim.v_min)
        ip = _snap(problem.x0, pos[0], grid.pos_step, grid.n_pos)
        iv = _snap(problem.v0, vel[0], grid.vel_step, grid.n_vel)
        x_start, v_start = float(pos[ip]), float(vel[iv])
        pos_tol, vel_tol = grid.pos_step + 1e-9, grid.vel_step + 1e-9
        snap = True
        pos0, pos_step, n_pos = float(pos[0]), grid.pos_step, grid.n_pos
        vel0, vel_step, n_vel = float(vel[0]), grid.vel_step, grid.n_vel
    else:
        if terminal_tol is None:
            raise ValueError("terminal_tol is required without a grid")
        x_start, v_start = problem.x0, problem.v0
        pos_tol, vel_tol = terminal_tol
        snap = False
        pos0, pos_step, n_pos = 0.0, 1.0, 1
        vel0, vel_step, n_vel = 0.0, 1.0, 1

    best, best_idx = exhaustive_scan(
        accels,
        problem.n_steps,
        problem.dt,
        x_start,
        v_start,
        c.alpha,
        c.beta,
        c.gamma,
        c.theta,
        c.eta,
        lim.v_min,
        lim.v_max,
        problem.x_goal,
        problem.v_goal,
        pos_tol,
        vel_tol,
        snap,
        pos0,
        pos_step,
        n_pos,
        vel0,
        vel_step,
        n_vel,
    )
    if best_idx < 0:
        raise RuntimeError("no feasible acceleration sequence reaches the terminal state")

    # reconstruct the argmin path
    ts, xs, vs, accs = [0.0], [x_start], [v_start], []
    x, v = x_start, v_start
    code = int(best_idx)
    for k in range(problem.n_steps):
        a = float(accels[code % len(accels)])
        code //= len(accels)
        x2 = x + v * problem.dt + 0.5 * a * problem.dt * problem.dt
        v2 = v + a * problem.dt
        if snap:
            ip = _snap(x2, pos0, pos_step, n_pos)
            iv = _snap(v2, vel0, vel_step, n_vel)
            x2, v2 = pos0 + ip * pos_step, vel0 + iv * vel_step
        x, v = x2, v2
        accs.append(a)
        ts.append((k + 1) * problem.dt)
        xs.append(x)
        vs.append(v)
    accs.append(0.0)
    return float(best), Trajectory(ts, xs, vs, accs, problem.dt)


def quantization_slack(problem: TrajectoryProblem, grid: DpGrid) -> float:
    """First-order objective sensitivity to one lattice cell.

    One velocity cell shifts the burn rate by roughly d(rate)/dv over the
    whole window; one dt slice covers the start-cell snap.
    """
    c = problem.fuel
    duration = problem.n_steps * problem.dt
    drate_dv = c.beta + 2.0 * c.gamma * problem.v_goal + c.theta * max(abs(a) for a in grid.accel_options)
    idle = c.alpha + c.beta * problem.v_goal + c.gamma * problem.v_goal**2
    return drate_dv * grid.vel_step * duration + idle * problem.dt


def toy_problems(max_steps: int = 20):
    """Desk-scale solver-vs-oracle comparison instances.

    Returns a list of (label, problem, grid) with accel options spaced at
    most j_max*dt apart so lattice paths stay jerk-representable.
    """
    from .domain import FuelCoefficients, Limits

    lim = Limits()
    fuel = FuelCoefficients()
    # (label, steps, dt, v0, v_goal, average speed); distance scales with the
    # actual step count so truncation keeps every instance reachable
    specs = [
        ("cruise-ish", min(10, max_steps), 0.5, 4.0, 4.0, 4.0),
        ("long-glide", min(16, max_steps), 0.5, 5.0, 5.0, 3.75),
        ("speed-up", min(20, max_steps), 0.5, 3.0, 5.0, 3.5),
        ("slow-down", min(12, max_steps), 0.5, 6.0, 3.0, 4.0),
        ("fine-grid", min(20, max_steps), 0.25, 5.0, 5.0, 4.8),
    ]
    out = []
    for label, n, dt, v0, v_goal, avg in specs:
        problem = TrajectoryProblem(
            n_steps=n, dt=dt, x0=0.0, v0=v0, a0=0.0, x_goal=avg * n * dt, v_goal=v_goal, limits=lim, fuel=fuel
        )
        step_cap = lim.j_max * dt
        accel_options = tuple(np.arange(-2.0, 2.0 + 1e-9, step_cap))
        grid = DpGrid.for_problem(problem, pos_step=0.5, vel_step=0.125, accel_options=accel_options)
        out.append((label, problem, grid))
    return out


def oracle_check(max_steps: int = 20, rel_tol: float = 0.05, verbose: bool = True) -> bool:
    """Solver-vs-DP comparison plus DP/exhaustive agreement; True when all pass."""
    from .optimal import solve

    ok = True
    for label, problem, grid in toy_problems(max_steps):
        dp_cost, _dp_traj = dp_min_fuel(problem, grid)
        _plan, report = solve(problem)
        bound = dp_cost * (1.0 + rel_tol) + quantization_slack(problem, grid)
        passed = report.converged and report.objective <= bound
        ok &= passed
        if verbose:
            print(
                f"{label}: solver={report.objective:.6f} dp={dp_cost:.6f} "
                f"bound={bound:.6f} converged={report.converged} -> "
                f"{'ok' if passed else 'FAIL'}"
            )
        if problem.n_steps <= 10:
            small_opts = tuple(grid.accel_options[:: max(1, len(grid.accel_options) // 3)])
            ex_cost, _ = exhaustive_min_fuel(problem, small_opts, grid=grid)
            small_grid = DpGrid(grid.n_pos, grid.n_vel, grid.pos_step, grid.vel_step, small_opts)
            dp_small, _ = dp_min_fuel(problem, small_grid)
            agree = ex_cost == dp_small
            ok &= agree
            if verbose:
                print(f"{label}: dp/exhaustive agreement {'ok' if agree else 'FAIL'} ({dp_small:.9f})")
    return bool(ok)
