"""Closed-form cubic-polynomial planner with arrival-time feasibility logic.

Plans are emitted as exact discrete rollouts of midpoint-sampled cubic
accelerations (midpoint sampling reproduces the cubic's speeds exactly on the
grid), with a closed-form terminal correction absorbing the O(dt^2) position
gap so stop-line residuals stay at machine scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Limits, Plan, PlanningError, TIME_EPS, VehicleState
from .kinematics import plan_from_accels, plan_from_segments, ramp_accels, terminal_corrected
from .signals import Phase, SignalObservation

DURATION_RESOLUTION = 0.01
_FLOOR_SCAN_MIN = 0.05


@dataclass(frozen=True)
class CubicCoeffs:
    """x(tau) = a3 tau^3 + a2 tau^2 + a1 tau + a0 in local time."""

    a3: float
    a2: float
    a1: float
    a0: float

    def position(self, tau):
        return ((self.a3 * tau + self.a2) * tau + self.a1) * tau + self.a0

    def velocity(self, tau):
        return (3.0 * self.a3 * tau + 2.0 * self.a2) * tau + self.a1

    def acceleration(self, tau):
        return 6.0 * self.a3 * tau + 2.0 * self.a2


@dataclass(frozen=True)
class ArrivalTimes:
    """Earliest feasible, cruise-predicted, and latest no-stop arrival times."""

    t_e: float
    t_p: float
    t_c: float


def predicted_arrival(state: VehicleState, x_light: float) -> float:
    """Constant-speed arrival time at the stop line; +inf when stopped."""
    if state.x >= x_light:
        raise PlanningError("vehicle is already at or past the stop line")
    if state.v <= 0.0:
        return math.inf
    return state.t + (x_light - state.x) / state.v


def solve_cubic(x0: float, v0: float, x1: float, v1: float, T_a: float) -> CubicCoeffs:
    """Unique cubic matching position and speed at both ends of [0, T_a].

    Solved in closed form (the eliminated 4x4 boundary system), so consistent
    cruise data yields exactly zero curvature coefficients.
    """
    if T_a <= 0.0:
        raise PlanningError("non-positive duration")
    residual = x1 - x0 - v0 * T_a
    dv = v1 - v0
    a3 = (dv * T_a - 2.0 * residual) / (T_a * T_a * T_a)
    a2 = (3.0 * residual - dv * T_a) / (T_a * T_a)
    return CubicCoeffs(a3=a3, a2=a2, a1=v0, a0=x0)


def _cubic_ok(coeffs: CubicCoeffs, T: float, limits: Limits, dt: float, v_floor: float) -> bool:
    n = int(T / dt)
    tau = dt * np.arange(n + 1)
    if T - tau[-1] > TIME_EPS:
        tau = np.append(tau, T)
    v = coeffs.velocity(tau)
    a = coeffs.acceleration(tau)
    return bool(
        np.all(v >= v_floor - TIME_EPS)
        and np.all(v <= limits.v_max + TIME_EPS)
        and np.all(a >= limits.a_min - TIME_EPS)
        and np.all(a <= limits.a_max + TIME_EPS)
    )


def _duration_feasible(v0: float, d: float, v_end: float, T: float, limits: Limits, dt: float, v_floor: float) -> bool:
    return _cubic_ok(solve_cubic(0.0, v0, d, v_end, T), T, limits, dt, v_floor)


def _duration_range(v0: float, d: float, v_end: float, limits: Limits, dt: float, v_floor: float):
    lo = max(2.0 * dt, 0.999 * d / limits.v_max)
    hi = d / max(v_floor, _FLOOR_SCAN_MIN)
    if hi <= lo:
        hi = lo * 4.0

    def ok(T: float) -> bool:
        return _duration_feasible(v0, d, v_end, T, limits, dt, v_floor)

    # geometric sweep plus physically-likely seeds (cruise and trapezoid times)
    seeds = [d / v0 if v0 > 0 else math.inf, 2.0 * d / max(v0 + v_end, 1e-6)]
    grid = list(np.geomspace(lo, hi, 48)) + [s for s in seeds if lo < s < hi]
    grid = sorted(grid)
    flags = [ok(T) for T in grid]
    if not any(flags):
        raise PlanningError("cubic infeasible under limits")
    first = flags.index(True)
    last = len(flags) - 1 - flags[::-1].index(True)

    t_min = grid[first]
    if first > 0:
        bad, good = grid[first - 1], grid[first]
        while good - bad > DURATION_RESOLUTION:
            mid = 0.5 * (good + bad)
            if ok(mid):
                good = mid
            else:
                bad = mid
        t_min = good
    t_max = grid[last]
    if last < len(grid) - 1:
        good, bad = grid[last], grid[last + 1]
        while bad - good > DURATION_RESOLUTION:
            mid = 0.5 * (good + bad)
            if ok(mid):
                good = mid
            else:
                bad = mid
        t_max = good
    return t_min, t_max


def feasible_duration_range(
    state: VehicleState,
    x_light: float,
    v_p: float,
    limits: Limits,
    dt: float = 0.1,
    v_crawl: float = 0.5,
):
    """Smallest and largest cubic durations to the stop line within limits.

    Feasibility requires v in [v_crawl, v_max] and a within its box at every
    dt sample; edges are located by bisection to 0.01 s.
    """
    if state.x >= x_light:
        raise PlanningError("vehicle is already at or past the stop line")
    return _duration_range(state.v, x_light - state.x, v_p, limits, dt, v_crawl)


def arrival_times(
    state: VehicleState,
    x_light: float,
    v_p: float,
    limits: Limits,
    dt: float = 0.1,
    v_crawl: float = 0.5,
) -> ArrivalTimes:
    t_min, t_max = feasible_duration_range(state, x_light, v_p, limits, dt, v_crawl)
    return ArrivalTimes(t_e=state.t + t_min, t_p=predicted_arrival(state, x_light), t_c=state.t + t_max)


def _midpoint_accels(coeffs: CubicCoeffs, n: int, dt: float) -> np.ndarray:
    return coeffs.acceleration(dt * (np.arange(n) + 0.5))


def _cubic_segment_accels(x0, v0, x1, v1, n, dt):
    """Midpoint-sampled accelerations corrected to hit (x1, v1) exactly."""
    coeffs = solve_cubic(0.0, v0, x1 - x0, v1, n * dt)
    a_seq = _midpoint_accels(coeffs, n, dt)
    corrected, _x, _v = terminal_corrected(a_seq, x0, v0, dt, x1, v1)
    return corrected


def go_cubic_steps(v_p: float, a_max: float, dt: float) -> int:
    """Duration (in steps) of the launch cubic from rest to v_p.

    The rest-to-speed cubic's peak acceleration is 1.5 v_p / T; sizing T for
    90% of a_max leaves headroom for the terminal correction.
    """
    t_go = max(1.5 * v_p / (0.9 * a_max), 2.0 * dt)
    return max(2, int(math.ceil(t_go / dt - TIME_EPS)))


def plan(
    state: VehicleState,
    obs: SignalObservation,
    limits: Limits,
    v_p: float,
    horizon: float,
    dt: float,
    x_light: float,
    exit_distance: float,
    v_crawl: float = 0.5,
    arrival_margin_s: float = 0.0,
) -> Plan:
    """Cubic approach plan for the observed signal schedule.

    Case 1/2: a single cubic arriving at the stop line at the earliest green
    time >= the predicted arrival, at speed v_p. Case 3 (target not
    reachable without stopping): decelerating cubic to rest at the line,
    exact-zero hold until green, then a launch cubic to v_p. Past the line
    the plan extrapolates at v_p.
    """
    if state.x > x_light + exit_distance + TIME_EPS:
        raise PlanningError("episode already complete")
    n_total = int(round(horizon / dt))

    if state.x >= x_light - TIME_EPS:
        return plan_from_accels(
            state.t, ramp_accels(state.v, v_p, n_total, dt, limits.a_max), state.x, state.v, dt, horizon
        )

    d = x_light - state.x
    if obs.current_phase is Phase.GREEN and d <= 3.0 * dt * max(v_p, state.v):
        # crossing is imminent during green: the dt-snapped arrival grid has
        # no feasible cubic left, so ramp through at the pass speed
        return plan_from_accels(
            state.t, ramp_accels(state.v, v_p, n_total, dt, limits.a_max), state.x, state.v, dt, horizon
        )

    t_p = predicted_arrival(state, x_light)
    g0 = max(obs.next_green_start + arrival_margin_s, state.t)
    g1 = obs.next_green_end

    if t_p < math.inf:
        # anchor on the pass-speed arrival when it falls inside green, else on
        # the window start; anchoring on the instantaneous t_p is unstable
        # mid-glide (each replan would re-target later and decay the speed)
        t_nat = state.t + d / v_p
        target = t_nat if g0 - TIME_EPS <= t_nat < g1 - TIME_EPS else g0
        n_t = max(int(math.ceil((target - state.t) / dt - 1e-9)), 0)
        while state.t + n_t * dt < g0 - TIME_EPS:
            n_t += 1
        if state.t + n_t * dt >= g1 - TIME_EPS:
            raise PlanningError("infeasible approach: target arrival beyond observed green window")
        if n_t < 2:
            # effectively at the line as green opens: ramp through at v_p
            return plan_from_accels(
                state.t, ramp_accels(state.v, v_p, n_total, dt, limits.a_max), state.x, state.v, dt, horizon
            )
        if _duration_feasible(state.v, d, v_p, n_t * dt, limits, dt, v_crawl):
            a_seq = _cubic_segment_accels(state.x, state.v, x_light, v_p, n_t, dt)
            return plan_from_accels(state.t, a_seq, state.x, state.v, dt, horizon)
        # target duration infeasible: try the earliest feasible no-stop arrival
        try:
            t_min, t_max = _duration_range(state.v, d, v_p, limits, dt, v_crawl)
        except PlanningError:
            t_min = t_max = None
        if t_min is not None:
            n_c = max(int(math.ceil((max(target - state.t, t_min)) / dt - 1e-9)), 2)
            arrive = state.t + n_c * dt
            if n_c * dt <= t_max + TIME_EPS and g0 - TIME_EPS <= arrive < g1 - TIME_EPS:
                if _duration_feasible(state.v, d, v_p, n_c * dt, limits, dt, v_crawl):
                    a_seq = _cubic_segment_accels(state.x, state.v, x_light, v_p, n_c, dt)
                    return plan_from_accels(state.t, a_seq, state.x, state.v, dt, horizon)

    # Case 3: stop at the line, hold at exact rest, launch at green
    n_wait = max(int(math.ceil((g0 - state.t) / dt - 1e-9)), 0)
    go_steps = go_cubic_steps(v_p, limits.a_max, dt)
    d_go = v_p * go_steps * dt / 2.0
    go_accels = _cubic_segment_accels(0.0, 0.0, d_go, v_p, go_steps, dt)

    if state.v <= TIME_EPS:
        # already stopped (at or short of the line): hold, then launch
        segments = [
            (np.zeros(n_wait), (state.x, 0.0)),
            (go_accels, (state.x + d_go, v_p)),
        ]
        return plan_from_segments(state.t, segments, state.x, 0.0, dt, horizon)

    try:
        s_min, s_max = _duration_range(state.v, d, 0.0, limits, dt, 0.0)
    except PlanningError as exc:
        raise PlanningError("infeasible approach: cannot stop at the line before green") from exc
    n_s = min(int(s_max / dt), n_wait)
    if n_s * dt < s_min - TIME_EPS or n_s < 2:
        raise PlanningError("infeasible approach: cannot stop at the line before green")
    stop_accels = _cubic_segment_accels(state.x, state.v, x_light, 0.0, n_s, dt)
    segments = [
        (stop_accels, (x_light, 0.0)),
        (np.zeros(n_wait - n_s), (x_light, 0.0)),
        (go_accels, (x_light + d_go, v_p)),
    ]
    return plan_from_segments(state.t, segments, state.x, state.v, dt, horizon)


class AnalyticalController:
    """Binds limits, target speed, cadence, and geometry to the cubic planner."""

    name = "analytical"

    def __init__(
        self,
        limits: Limits,
        v_p: float,
        horizon: float,
        dt: float,
        x_light: float,
        exit_distance: float,
        v_crawl: float = 0.5,
        arrival_margin_s: float = 0.0,
    ):
        self.limits = limits
        self.v_p = v_p
        self.horizon = horizon
        self.dt = dt
        self.x_light = x_light
        self.exit_distance = exit_distance
        self.v_crawl = v_crawl
        self.arrival_margin_s = arrival_margin_s

    @classmethod
    def from_scenario(cls, config) -> "AnalyticalController":
        return cls(
            config.limits,
            config.v_p,
            config.horizon,
            config.dt,
            config.x_light,
            config.exit_distance,
            v_crawl=config.v_crawl,
            arrival_margin_s=config.arrival_margin_s,
        )

    def plan(self, state: VehicleState, obs: SignalObservation) -> Plan:
        return plan(
            state,
            obs,
            self.limits,
            self.v_p,
            self.horizon,
            self.dt,
            self.x_light,
            self.exit_distance,
            v_crawl=self.v_crawl,
            arrival_margin_s=self.arrival_margin_s,
        )
