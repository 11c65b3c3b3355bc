"""Benchmark stop-and-go policy: cruise, stop at the line on red, depart on green."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import ConfigError, Limits, Plan, PlanningError, TIME_EPS, VehicleState
from .kinematics import plan_from_accels, step_kinematics
from .signals import SignalObservation

_V_STOP_EPS = 1e-9


@dataclass(frozen=True)
class StopGoConfig:
    """Cruise speed, comfort accel magnitude, tracking gain, reaction delay.

    ``stop_margin_m`` is how far short of the line the policy aims its stop;
    execution noise must not push the resting vehicle past the line.
    """

    v_exp: float = 5.0
    a_comfort: float = 1.5
    k_v: float = 0.8
    reaction_delay_s: float = 0.0
    stop_margin_m: float = 0.25

    def check(self, limits: Limits) -> None:
        if not (limits.v_min < self.v_exp <= limits.v_max):
            raise ConfigError("stopgo v_exp must lie in (v_min, v_max]")
        if not (0 < self.a_comfort <= min(-limits.a_min, limits.a_max)):
            raise ConfigError("stopgo a_comfort must lie in (0, min(|a_min|, a_max)]")
        if self.k_v <= 0:
            raise ConfigError("stopgo k_v must be positive")
        if self.stop_margin_m < 0:
            raise ConfigError("stopgo stop_margin_m must be >= 0")


def plan(
    state: VehicleState,
    obs: SignalObservation,
    cfg: StopGoConfig,
    limits: Limits,
    horizon: float,
    dt: float,
    x_light: float,
    exit_distance: float,
) -> Plan:
    """Forward-simulate the three-phase rule over the horizon.

    Cruise tracks v_exp proportionally; once the constant-deceleration
    stopping envelope reaches the remaining distance during red (yellow is
    treated as red), the exact braking law brings the vehicle to rest at the
    line; the vehicle departs at the observed green start plus the reaction
    delay.
    """
    if state.x > x_light + exit_distance + TIME_EPS:
        raise PlanningError("episode already complete")
    n = int(round(horizon / dt))
    go_from = obs.next_green_start + cfg.reaction_delay_s
    go_until = obs.next_green_end
    stop_target = x_light - cfg.stop_margin_m

    a_seq = np.empty(n)
    x, v = state.x, state.v
    for k in range(n):
        tau = state.t + k * dt
        in_go_window = go_from - TIME_EPS <= tau < go_until - TIME_EPS
        if in_go_window or x > x_light + TIME_EPS:
            a = _track(v, cfg)
        elif v <= _V_STOP_EPS:
            a = 0.0  # stopped at or short of the line on red: hold
        else:
            d_rem = stop_target - x
            if v * v / (2.0 * cfg.a_comfort) + v * dt >= d_rem:
                a = _brake(v, d_rem, limits, dt)
            else:
                a = _track(v, cfg)
        x2, v2 = step_kinematics(x, v, a, dt)
        if not in_go_window and x < x_light - TIME_EPS and x2 > x_light + TIME_EPS:
            # the plan must not roll past the line on red: brake as hard as allowed
            a = max(-v / dt, limits.a_min)
            x2, v2 = step_kinematics(x, v, a, dt)
        a_seq[k] = a
        x, v = x2, v2
    return plan_from_accels(state.t, a_seq, state.x, state.v, dt, horizon)


def _track(v: float, cfg: StopGoConfig) -> float:
    a = cfg.k_v * (cfg.v_exp - v)
    return min(max(a, -cfg.a_comfort), cfg.a_comfort)


def _brake(v: float, d_rem: float, limits: Limits, dt: float) -> float:
    # exact constant-decel law toward the line; stop outright once slow enough
    # that a one-step stop stays within the hard limit
    if d_rem <= TIME_EPS or v <= -limits.a_min * dt:
        a = -v / dt
    else:
        a = -v * v / (2.0 * d_rem)
    a = min(max(a, limits.a_min), 0.0)
    if v + a * dt < 0.0:
        a = -v / dt
    return a


class StopGoController:
    """Binds configuration and geometry to the planning rule."""

    name = "stopgo"

    def __init__(self, cfg: StopGoConfig, limits: Limits, horizon: float, dt: float, x_light: float, exit_distance: float):
        cfg.check(limits)
        self.cfg = cfg
        self.limits = limits
        self.horizon = horizon
        self.dt = dt
        self.x_light = x_light
        self.exit_distance = exit_distance

    @classmethod
    def from_scenario(cls, config, cfg: StopGoConfig | None = None) -> "StopGoController":
        cfg = cfg or StopGoConfig(v_exp=config.v_exp)
        return cls(cfg, config.limits, config.horizon, config.dt, config.x_light, config.exit_distance)

    def plan(self, state: VehicleState, obs: SignalObservation) -> Plan:
        return plan(state, obs, self.cfg, self.limits, self.horizon, self.dt, self.x_light, self.exit_distance)
