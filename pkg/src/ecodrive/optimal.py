"""Fuel-minimal trajectory planner by direct single-shooting transcription.

Decision variables are per-step jerks; states follow the exact forward
recursion, so emitted plans carry no dynamics residual. Terminal equality
constraints are handled by an augmented Lagrangian, speed/acceleration boxes
by their own multiplier terms, and the jerk box by projection. The fuel
polynomial is indefinite in (v, a) with the published coefficients, so only
local optimality is claimed; small instances are cross-checked against the
lattice oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import adjoint_jerk, rollout_jerk, value_grad
from .domain import FuelCoefficients, Limits, Plan, PlanningError, TIME_EPS, Trajectory, VehicleState
from .kinematics import plan_from_accels, ramp_accels, terminal_corrected
from .signals import Phase, SignalObservation

MAX_ITERATIONS = 5000
EQ_TOL = 1e-6
BOX_TOL = 1e-8


@dataclass(frozen=True)
class TrajectoryProblem:
    """One fixed-endpoint fuel-minimization instance."""

    n_steps: int
    dt: float
    x0: float
    v0: float
    a0: float
    x_goal: float
    v_goal: float
    limits: Limits
    fuel: FuelCoefficients

    def __post_init__(self):
        if self.n_steps < 2:
            raise PlanningError("horizon too short: need at least 2 steps")
        if self.x_goal <= self.x0:
            raise PlanningError("goal position must lie ahead of the start")
        if not (self.limits.v_min <= self.v_goal <= self.limits.v_max):
            raise PlanningError("goal speed outside the speed box")


@dataclass
class SolveReport:
    objective: float
    max_equality_residual: float
    max_box_violation: float
    iterations: int
    converged: bool


def build(
    state: VehicleState,
    t_star: float,
    v_p: float,
    x_light: float,
    limits: Limits,
    fuel: FuelCoefficients,
    dt: float,
) -> TrajectoryProblem:
    """Transcribe 'arrive at x_light at t_star with speed v_p' into a problem."""
    if t_star - state.t < 2.0 * dt - TIME_EPS:
        raise PlanningError("horizon too short")
    n = int(round((t_star - state.t) / dt))
    # the measured accel seeds the jerk chain; clamp it so the first step can
    # stay inside the speed box (the plant clamps at v=0 where the raw
    # recursion cannot)
    a0 = min(max(state.a, (limits.v_min - state.v) / dt), (limits.v_max - state.v) / dt)
    a0 = min(max(a0, limits.a_min), limits.a_max)
    return TrajectoryProblem(
        n_steps=n,
        dt=dt,
        x0=state.x,
        v0=state.v,
        a0=a0,
        x_goal=x_light,
        v_goal=v_p,
        limits=limits,
        fuel=fuel,
    )


def objective_and_gradient(problem: TrajectoryProblem, jerks: np.ndarray):
    """Transcribed fuel objective and its analytic gradient over the jerks.

    The raw polynomial is used (the zero floor is inert inside the box); the
    objective covers every state of the window, one dt slice each.
    """
    jerks = np.asarray(jerks, dtype=float)
    c = problem.fuel
    dt = problem.dt
    x, v, a = rollout_jerk(jerks, dt, problem.x0, problem.v0, problem.a0)
    e = c.alpha + c.beta * v + c.gamma * v * v + c.theta * v * a + c.eta * a * a
    objective = dt * float(np.sum(e))
    gx = np.zeros_like(x)
    gv = (c.beta + 2.0 * c.gamma * v + c.theta * a) * dt
    ga = (c.theta * v + 2.0 * c.eta * a) * dt
    return objective, adjoint_jerk(gx, gv, ga, dt)


def _reachability_check(p: TrajectoryProblem) -> None:
    T = p.n_steps * p.dt
    lim = p.limits
    slack = max(lim.v_max * p.dt, 1.0)
    if p.v_goal > p.v0 + lim.a_max * T + TIME_EPS or p.v_goal < p.v0 + lim.a_min * T - TIME_EPS:
        raise PlanningError("terminal state unreachable: speed change exceeds limits")
    d = p.x_goal - p.x0
    t_up = min(T, (lim.v_max - p.v0) / lim.a_max) if lim.a_max > 0 else 0.0
    x_max = p.v0 * t_up + 0.5 * lim.a_max * t_up * t_up + lim.v_max * (T - t_up)
    t_dn = min(T, (p.v0 - lim.v_min) / -lim.a_min) if lim.a_min < 0 else 0.0
    x_min = p.v0 * t_dn + 0.5 * lim.a_min * t_dn * t_dn + lim.v_min * (T - t_dn)
    if d > x_max + slack or d < x_min - slack:
        raise PlanningError("terminal state unreachable: distance outside the feasible envelope")


def _feasibility(p: TrajectoryProblem, jerks: np.ndarray):
    """(objective, eq residual, box violation incl. jerk box) of a candidate."""
    x, v, a = rollout_jerk(jerks, p.dt, p.x0, p.v0, p.a0)
    c = p.fuel
    e = c.alpha + c.beta * v + c.gamma * v * v + c.theta * v * a + c.eta * a * a
    obj = p.dt * float(np.sum(e))
    eq = max(abs(float(x[-1]) - p.x_goal), abs(float(v[-1]) - p.v_goal))
    lim = p.limits
    viol = max(
        0.0,
        float(np.max(v - lim.v_max)),
        float(np.max(lim.v_min - v)),
        float(np.max(a - lim.a_max)),
        float(np.max(lim.a_min - a)),
        float(np.max(jerks - lim.j_max)) if len(jerks) else 0.0,
        float(np.max(lim.j_min - jerks)) if len(jerks) else 0.0,
    )
    return obj, eq, viol


def _inner_minimize(eval_fn, j, j_lo, j_hi, pg_tol, max_iters):
    """Projected spectral-gradient descent with non-monotone backtracking.

    Exits on projected-gradient tolerance, iteration budget, or when the
    value stalls (the stiff penalized subproblem flattens long before the
    projected gradient does).
    """
    value, grad = eval_fn(j)
    iters = 0
    step = 1.0 / (float(np.max(np.abs(grad))) + 1.0)
    history = [value]
    best = value
    stalled = 0
    while iters < max_iters:
        pg = j - np.clip(j - grad, j_lo, j_hi)
        pg_norm = float(np.max(np.abs(pg))) if len(pg) else 0.0
        if pg_norm <= pg_tol:
            break
        ref = max(history[-8:])
        accepted = False
        trial_step = step
        for _ in range(40):
            j_new = np.clip(j - trial_step * grad, j_lo, j_hi)
            diff = j_new - j
            if not np.any(diff):
                break
            value_new, grad_new = eval_fn(j_new)
            iters += 1
            if value_new <= ref - 1e-4 / max(trial_step, 1e-12) * float(np.dot(diff, diff)):
                accepted = True
                break
            trial_step *= 0.5
            if iters >= max_iters:
                break
        if not accepted:
            break
        s = j_new - j
        y = grad_new - grad
        sy = float(np.dot(s, y))
        if sy > 1e-14:
            step = min(max(float(np.dot(s, s)) / sy, 1e-10), 1e6)
        else:
            step = min(trial_step * 2.0, 1e6)
        j, value, grad = j_new, value_new, grad_new
        history.append(value)
        if best - value <= 1e-11 * (1.0 + abs(best)):
            stalled += 1
            if stalled >= 10:
                break
        else:
            stalled = 0
        best = min(best, value)
    pg = j - np.clip(j - grad, j_lo, j_hi)
    return j, iters, float(np.max(np.abs(pg))) if len(pg) else 0.0


def solve(problem: TrajectoryProblem, warm_start=None):
    """Minimize the transcribed fuel objective; returns (Plan, SolveReport).

    Conforms to: terminal residuals < 1e-4 (converged flag requires < 1e-6),
    v/a/j boxes within 1e-8, projected-gradient stationarity, iteration cap
    5000 with non-convergence surfaced rather than hidden.
    """
    p = problem
    _reachability_check(p)
    n = p.n_steps
    dt = p.dt
    lim = p.limits
    c = p.fuel

    warm_jerks = _warm_jerks(p, warm_start)
    j = np.clip(warm_jerks if warm_jerks is not None else np.zeros(n), lim.j_min, lim.j_max)

    lam_x = 0.0
    lam_v = 0.0
    rho = 10.0
    lam_vh = np.zeros(n + 1)
    lam_vl = np.zeros(n + 1)
    lam_ah = np.zeros(n + 1)
    lam_al = np.zeros(n + 1)

    total_iters = 0
    best_gap = math.inf

    def make_eval(lx, lv, rho_now, lvh, lvl, lah, lal):
        def _eval(jj):
            value, grad, _e, _hx, _hv, _viol = value_grad(
                jj, dt, p.x0, p.v0, p.a0, p.x_goal, p.v_goal,
                c.alpha, c.beta, c.gamma, c.theta, c.eta,
                lim.v_min, lim.v_max, lim.a_min, lim.a_max,
                lx, lv, rho_now, lvh, lvl, lah, lal, rho_now,
            )
            return value, grad
        return _eval

    hx = hv = viol = math.inf
    energy_prev = math.inf
    for _outer in range(60):
        budget = min(400, MAX_ITERATIONS - total_iters)
        if budget <= 0:
            break
        gap_tol = max(1e-7, min(1e-3, 0.05 * best_gap))
        j, used, _pg_norm = _inner_minimize(
            make_eval(lam_x, lam_v, rho, lam_vh, lam_vl, lam_ah, lam_al),
            j, lim.j_min, lim.j_max, gap_tol, budget,
        )
        total_iters += max(used, 1)
        _value, _grad, _e, hx, hv, viol = value_grad(
            j, dt, p.x0, p.v0, p.a0, p.x_goal, p.v_goal,
            c.alpha, c.beta, c.gamma, c.theta, c.eta,
            lim.v_min, lim.v_max, lim.a_min, lim.a_max,
            lam_x, lam_v, rho, lam_vh, lam_vl, lam_ah, lam_al, rho,
        )
        gap = max(abs(hx), abs(hv), viol)
        # converged once both residual families meet tolerance and the fuel
        # objective stalls
        eq_ok = max(abs(hx), abs(hv)) < 0.5 * EQ_TOL
        box_ok = viol < 0.5 * BOX_TOL
        if eq_ok and box_ok and abs(_e - energy_prev) <= max(1e-10, 1e-9 * abs(_e)):
            break
        energy_prev = _e
        lam_x += rho * hx
        lam_v += rho * hv
        x, v, a = rollout_jerk(j, dt, p.x0, p.v0, p.a0)
        lam_vh = np.maximum(0.0, lam_vh + rho * (v - lim.v_max))
        lam_vl = np.maximum(0.0, lam_vl + rho * (lim.v_min - v))
        lam_ah = np.maximum(0.0, lam_ah + rho * (a - lim.a_max))
        lam_al = np.maximum(0.0, lam_al + rho * (lim.a_min - a))
        if gap > 0.25 * best_gap:
            rho = min(rho * 4.0, 1e8)
        best_gap = min(best_gap, gap)
        if total_iters >= MAX_ITERATIONS:
            break

    j = _restore_box(p, j)
    j = _polish_terminal(p, j)
    obj, eq, box_viol = _feasibility(p, j)

    # descent safeguard: never return worse than a feasible warm start
    if warm_jerks is not None:
        w_obj, w_eq, w_viol = _feasibility(p, warm_jerks)
        if w_eq <= max(eq, 1e-4) and w_viol <= BOX_TOL and w_obj < obj:
            j, obj, eq, box_viol = warm_jerks, w_obj, w_eq, w_viol

    report = SolveReport(
        objective=obj,
        max_equality_residual=eq,
        max_box_violation=box_viol,
        iterations=total_iters,
        converged=bool(eq < EQ_TOL and box_viol < BOX_TOL),
    )
    x, v, a = rollout_jerk(j, dt, p.x0, p.v0, p.a0)
    if np.any(v < -1e-3):
        # a grossly infeasible iterate would corrupt the episode; surface it
        raise PlanningError("solver produced negative speeds beyond tolerance")
    t = np.arange(n + 1) * dt
    traj = Trajectory(t, x, np.maximum(v, 0.0), a, dt)
    plan_obj = Plan(issued_at=0.0, horizon=n * dt, traj=traj)
    return plan_obj, report


def _warm_jerks(p: TrajectoryProblem, warm_start):
    if warm_start is None:
        return None
    if isinstance(warm_start, np.ndarray):
        j = warm_start.astype(float)
    elif isinstance(warm_start, Plan):
        a = warm_start.traj.a
        j = np.diff(a[: p.n_steps + 1]) / p.dt
    else:
        raise TypeError("warm_start must be a Plan or a jerk array")
    if len(j) >= p.n_steps:
        return j[: p.n_steps].copy()
    return np.concatenate([j, np.zeros(p.n_steps - len(j))])


def _restore_box(p: TrajectoryProblem, j: np.ndarray) -> np.ndarray:
    """Forward-clamp residual speed/accel box dust out of an AL iterate.

    Kept only when it improves the worst violation; near-degenerate boxes
    (e.g. v_min == v_max) leave the multiplier loop with residuals it cannot
    efficiently squeeze below tolerance.
    """
    _obj0, eq0, viol0 = _feasibility(p, j)
    if viol0 <= BOX_TOL:
        return j
    lim = p.limits
    dt = p.dt
    _x, _v, a = rollout_jerk(j, dt, p.x0, p.v0, p.a0)
    out = np.empty(p.n_steps)
    v_cur = p.v0
    for k in range(p.n_steps):
        ak = min(max(a[k], lim.a_min), lim.a_max)
        ak = min(max(ak, (lim.v_min - v_cur) / dt), (lim.v_max - v_cur) / dt)
        out[k] = ak
        v_cur = v_cur + ak * dt
    j_new = np.empty_like(j)
    j_new[0] = (out[0] - p.a0) / dt
    j_new[1:] = np.diff(out) / dt
    _obj1, eq1, viol1 = _feasibility(p, j_new)
    if max(eq1, viol1) < max(eq0, viol0):
        return j_new
    return j


def _polish_terminal(p: TrajectoryProblem, j: np.ndarray) -> np.ndarray:
    """Exact terminal correction in the accel space, kept only if it helps."""
    x, v, a = rollout_jerk(j, p.dt, p.x0, p.v0, p.a0)
    accels = a[:-1].copy()
    corrected, x2, v2 = terminal_corrected(accels, p.x0, p.v0, p.dt, p.x_goal, p.v_goal)
    j_new = np.empty_like(j)
    j_new[0] = (corrected[0] - p.a0) / p.dt
    j_new[1:] = np.diff(corrected) / p.dt
    _obj0, eq0, viol0 = _feasibility(p, j)
    _obj1, eq1, viol1 = _feasibility(p, j_new)
    if eq1 < eq0 and viol1 <= max(viol0, BOX_TOL):
        return j_new
    return j


def _min_travel_time(d: float, v0: float, limits: Limits) -> float:
    """Bang-profile lower bound on the time to cover d meters."""
    if d <= 0:
        return 0.0
    t_up = (limits.v_max - v0) / limits.a_max if limits.a_max > 0 else 0.0
    d_up = v0 * t_up + 0.5 * limits.a_max * t_up * t_up
    if d <= d_up:
        return (-v0 + math.sqrt(v0 * v0 + 2.0 * limits.a_max * d)) / limits.a_max
    return t_up + (d - d_up) / limits.v_max


def plan_with_report(
    state: VehicleState,
    obs: SignalObservation,
    limits: Limits,
    fuel: FuelCoefficients,
    v_p: float,
    horizon: float,
    dt: float,
    x_light: float,
    exit_distance: float,
    arrival_margin_s: float = 0.0,
    warm_start=None,
):
    """Full-horizon plan arriving at the earliest green time >= t_p.

    Returns (Plan, SolveReport or None); the report is None on the trivial
    past-the-line cruise branch.
    """
    if state.x > x_light + exit_distance + TIME_EPS:
        raise PlanningError("episode already complete")
    n_total = int(round(horizon / dt))

    if state.x >= x_light - TIME_EPS:
        return (
            plan_from_accels(state.t, ramp_accels(state.v, v_p, n_total, dt, limits.a_max), state.x, state.v, dt, horizon),
            None,
        )

    d = x_light - state.x
    if obs.current_phase is Phase.GREEN and d <= 3.0 * dt * max(v_p, state.v):
        # crossing is imminent during green: too few steps remain for a
        # meaningful solve window, so ramp through at the pass speed
        return (
            plan_from_accels(state.t, ramp_accels(state.v, v_p, n_total, dt, limits.a_max), state.x, state.v, dt, horizon),
            None,
        )

    g0 = max(obs.next_green_start + arrival_margin_s, state.t)
    g1 = obs.next_green_end
    # same arrival targeting as the analytical planner: the pass-speed arrival
    # when it falls inside green, otherwise the window start
    t_nat = state.t + d / v_p
    target = t_nat if g0 - TIME_EPS <= t_nat < g1 - TIME_EPS else g0
    target = max(target, state.t + _min_travel_time(d, state.v, limits))
    n_t = max(int(math.ceil((target - state.t) / dt - 1e-9)), 0)
    while state.t + n_t * dt < g0 - TIME_EPS:
        n_t += 1
    if state.t + n_t * dt >= g1 - TIME_EPS:
        raise PlanningError("infeasible approach: target arrival beyond observed green window")
    if n_t < 2:
        return (
            plan_from_accels(state.t, ramp_accels(state.v, v_p, n_total, dt, limits.a_max), state.x, state.v, dt, horizon),
            None,
        )

    problem = build(state, state.t + n_t * dt, v_p, x_light, limits, fuel, dt)
    window_plan, report = solve(problem, warm_start=warm_start)
    accels = window_plan.traj.a[:-1]
    full = plan_from_accels(state.t, accels, state.x, state.v, dt, horizon)
    return full, report


def plan(
    state: VehicleState,
    obs: SignalObservation,
    limits: Limits,
    fuel: FuelCoefficients,
    v_p: float,
    horizon: float,
    dt: float,
    x_light: float,
    exit_distance: float,
    arrival_margin_s: float = 0.0,
    warm_start=None,
) -> Plan:
    """Like plan_with_report, returning only the plan."""
    full, _report = plan_with_report(
        state, obs, limits, fuel, v_p, horizon, dt, x_light, exit_distance,
        arrival_margin_s=arrival_margin_s, warm_start=warm_start,
    )
    return full


class OptimalController:
    """Binds configuration to the solver and warm-starts successive replans."""

    name = "optimal"

    def __init__(
        self,
        limits: Limits,
        fuel: FuelCoefficients,
        v_p: float,
        horizon: float,
        dt: float,
        x_light: float,
        exit_distance: float,
        arrival_margin_s: float = 0.0,
    ):
        self.limits = limits
        self.fuel = fuel
        self.v_p = v_p
        self.horizon = horizon
        self.dt = dt
        self.x_light = x_light
        self.exit_distance = exit_distance
        self.arrival_margin_s = arrival_margin_s
        self._last_issue = None
        self._last_jerks = None
        self.last_report = None

    @classmethod
    def from_scenario(cls, config) -> "OptimalController":
        return cls(
            config.limits,
            config.fuel,
            config.v_p,
            config.horizon,
            config.dt,
            config.x_light,
            config.exit_distance,
            arrival_margin_s=config.arrival_margin_s,
        )

    def _shifted_warm_start(self, t: float):
        """Jerk tail continuing the previous plan from the replan instant.

        The measured accel at t is the one applied over the step ending at t,
        so the continuation's first jerk is the previous plan's step s-1 jerk.
        """
        if self._last_jerks is None:
            return None
        shift = int(round((t - self._last_issue) / self.dt)) - 1
        if shift < 0 or shift >= len(self._last_jerks):
            return None
        return self._last_jerks[shift:]

    def plan(self, state: VehicleState, obs: SignalObservation) -> Plan:
        full, report = plan_with_report(
            state,
            obs,
            self.limits,
            self.fuel,
            self.v_p,
            self.horizon,
            self.dt,
            self.x_light,
            self.exit_distance,
            arrival_margin_s=self.arrival_margin_s,
            warm_start=self._shifted_warm_start(state.t),
        )
        self.last_report = report
        if report is not None:
            applied = full.traj.a[:-1]
            self._last_issue = state.t
            self._last_jerks = np.diff(applied) / self.dt
        else:
            self._last_issue = None
            self._last_jerks = None
        return full
