"""Core value types shared by every part of the simulator.

Conventions: ``x`` measures distance traveled from the episode origin in
meters and grows monotonically, the stop line sits at ``x = approach_distance``,
time is absolute episode time in seconds starting at zero, and every stored
sequence is uniformly sampled at the simulation step ``dt``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TIME_EPS = 1e-9


class ConfigError(ValueError):
    """A scenario value violates one of its documented invariants."""


class PlanningError(RuntimeError):
    """A planner cannot produce a plan from the given state."""


@dataclass(frozen=True)
class VehicleState:
    """Kinematic snapshot at one instant.

    ``a`` is the acceleration acting from ``t`` until the next sample.
    """

    t: float
    x: float
    v: float
    a: float


class Trajectory:
    """Uniformly sampled kinematic history backed by numpy arrays.

    Parameters
    ----------
    t, x, v, a : array_like
        Equal-length sample arrays. Timestamps must be strictly increasing
        with spacing ``dt`` within 1e-9 s; speeds must be non-negative up to
        numerical dust.
    dt : float
        Sample spacing in seconds.
    """

    __slots__ = ("t", "x", "v", "a", "dt")

    def __init__(self, t, x, v, a, dt: float):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        a = np.asarray(a, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("trajectory must contain at least one state")
        if not (t.shape == x.shape == v.shape == a.shape):
            raise ValueError("trajectory arrays must share one length")
        if dt <= 0:
            raise ValueError("dt must be positive")
        if t.size > 1:
            gaps = np.diff(t)
            if np.any(np.abs(gaps - dt) > TIME_EPS):
                raise ValueError("timestamps must increase by dt within 1e-9 s")
        if np.any(v < -TIME_EPS):
            raise ValueError("speed must be non-negative")
        self.t = t
        self.x = x
        self.v = v
        self.a = a
        self.dt = float(dt)

    def __len__(self) -> int:
        return int(self.t.size)

    def __getstate__(self):
        return (self.t, self.x, self.v, self.a, self.dt)

    def __setstate__(self, state):
        self.t, self.x, self.v, self.a, self.dt = state

    def state(self, i: int) -> VehicleState:
        return VehicleState(float(self.t[i]), float(self.x[i]), float(self.v[i]), float(self.a[i]))

    def states(self):
        """Iterate samples as VehicleState values."""
        for i in range(len(self)):
            yield self.state(i)

    @classmethod
    def from_states(cls, states, dt: float) -> "Trajectory":
        states = list(states)
        return cls(
            [s.t for s in states],
            [s.x for s in states],
            [s.v for s in states],
            [s.a for s in states],
            dt,
        )

    def slice_time(self, t1: float, t2: float) -> "Trajectory":
        """Sub-trajectory over the half-open window (t1, t2]."""
        mask = (self.t > t1 + TIME_EPS) & (self.t <= t2 + TIME_EPS)
        if not np.any(mask):
            raise ValueError("slice window contains no samples")
        return Trajectory(self.t[mask], self.x[mask], self.v[mask], self.a[mask], self.dt)

    def window(self, t_start: float, t_end: float) -> "Trajectory":
        """Sub-trajectory over the closed window [t_start, t_end]."""
        return self.slice_time(t_start - self.dt, t_end)

    def first_crossing(self, x_threshold: float):
        """Earliest sample time with x >= x_threshold, or None."""
        hits = np.nonzero(self.x >= x_threshold)[0]
        if hits.size == 0:
            return None
        return float(self.t[hits[0]])


@dataclass(frozen=True)
class Plan:
    """Planner output covering [issued_at, issued_at + horizon]."""

    issued_at: float
    horizon: float
    traj: Trajectory

    def __post_init__(self):
        if abs(self.traj.t[0] - self.issued_at) > TIME_EPS:
            raise ValueError("plan must start at its issue time")
        if self.traj.t[-1] + TIME_EPS < self.issued_at + self.horizon:
            raise ValueError("plan must cover its full horizon")

    def index_at(self, t: float) -> int:
        i = int(round((t - self.issued_at) / self.traj.dt))
        if i < 0 or i >= len(self.traj) or abs(self.traj.t[i] - t) > TIME_EPS:
            raise ValueError(f"time {t} is not a sample of this plan")
        return i


@dataclass(frozen=True)
class Limits:
    """Box bounds on speed, acceleration, and jerk."""

    v_min: float = 0.0
    v_max: float = 15.0
    a_min: float = -3.0
    a_max: float = 3.0
    j_min: float = -2.0
    j_max: float = 2.0

    def check(self) -> None:
        if self.v_min < 0:
            raise ConfigError("limits.v_min must be >= 0")
        for lo, hi, name in (
            (self.v_min, self.v_max, "v"),
            (self.a_min, self.a_max, "a"),
            (self.j_min, self.j_max, "j"),
        ):
            if not lo < hi:
                raise ConfigError(f"limits.{name}_min must be < limits.{name}_max")


@dataclass(frozen=True)
class FuelCoefficients:
    """Coefficients of the quadratic speed/acceleration burn-rate polynomial."""

    alpha: float = 0.15
    beta: float = 0.0025
    gamma: float = 0.00006
    theta: float = 0.00035
    eta: float = 0.0004

    def check(self) -> None:
        if not self.alpha > 0:
            raise ConfigError("fuel.alpha must be positive (idle burn)")


@dataclass(frozen=True)
class UtilityWeights:
    """Weights of the pass-time and energy terms of the utility."""

    w1: float = 0.05
    w2: float = 1.0

    def check(self) -> None:
        if self.w1 < 0 or self.w2 < 0:
            raise ConfigError("weights must be non-negative")
        if self.w1 == 0 and self.w2 == 0:
            raise ConfigError("weights.w1 and weights.w2 must not both be zero")
