"""Internal execution-disturbance channels and reproducible random streams.

Internal channels: first-order actuator lag, a fixed command delay, truncated
Gaussian acceleration noise, and truncated Gaussian speed-measurement noise.
The external channel (a signal phase extension) lives on the signal timeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import ConfigError, TIME_EPS
from .signals import SignalObservation


@dataclass(frozen=True)
class DisturbanceSpec:
    """Magnitudes of the internal disturbance channels; all zero by default."""

    actuator_tau: float = 0.0
    command_delay_steps: int = 0
    accel_noise_sigma: float = 0.0
    measurement_noise_sigma_v: float = 0.0

    def check(self) -> None:
        if self.actuator_tau < 0:
            raise ConfigError("disturbance.tau must be >= 0")
        if self.command_delay_steps < 0:
            raise ConfigError("disturbance.delay_steps must be >= 0")
        if self.accel_noise_sigma < 0:
            raise ConfigError("disturbance.accel_sigma must be >= 0")
        if self.measurement_noise_sigma_v < 0:
            raise ConfigError("disturbance.meas_sigma_v must be >= 0")

    @property
    def is_zero(self) -> bool:
        return (
            self.actuator_tau == 0.0
            and self.command_delay_steps == 0
            and self.accel_noise_sigma == 0.0
            and self.measurement_noise_sigma_v == 0.0
        )


class RandomStream:
    """Seeded draw stream with a position counter.

    Equal (seed, counter) prefixes yield identical draw sequences; callers
    must skip draws entirely (rather than draw-and-ignore) for disabled
    channels so that zero-noise runs stay bit-reproducible.
    """

    __slots__ = ("seed", "counter", "_gen")

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.counter = 0
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def truncated_normal(self, sigma: float) -> float:
        """One zero-mean Gaussian draw clipped to +/- 4 sigma."""
        self.counter += 1
        z = self._gen.normal(0.0, sigma)
        bound = 4.0 * sigma
        return float(min(max(z, -bound), bound))


@dataclass(frozen=True)
class ControlErrorSeries:
    """Per-sample executed-minus-planned state differences."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def __len__(self) -> int:
        return int(self.t.size)


def _align(first, second):
    """Indices of the overlapping, timestamp-matched window of two trajectories."""
    if abs(first.dt - second.dt) > TIME_EPS:
        raise ValueError("timestamp mismatch: trajectories use different dt")
    start = max(first.t[0], second.t[0])
    end = min(first.t[-1], second.t[-1])
    if end < start - TIME_EPS:
        raise ValueError("timestamp mismatch: trajectories do not overlap")
    i0 = int(round((start - first.t[0]) / first.dt))
    j0 = int(round((start - second.t[0]) / second.dt))
    n = int(round((end - start) / first.dt)) + 1
    ti = first.t[i0 : i0 + n]
    tj = second.t[j0 : j0 + n]
    if ti.shape != tj.shape or np.any(np.abs(ti - tj) > TIME_EPS):
        raise ValueError("timestamp mismatch: sample grids do not line up")
    return i0, j0, n


def control_error_series(executed, planned_concat) -> ControlErrorSeries:
    """Elementwise executed - planned state difference over the common support."""
    i0, j0, n = _align(executed, planned_concat)
    sl_e = slice(i0, i0 + n)
    sl_p = slice(j0, j0 + n)
    return ControlErrorSeries(
        t=executed.t[sl_e].copy(),
        x=executed.x[sl_e] - planned_concat.x[sl_p],
        v=executed.v[sl_e] - planned_concat.v[sl_p],
        a=executed.a[sl_e] - planned_concat.a[sl_p],
    )


def external_deviation(o_new: SignalObservation, o_old: SignalObservation) -> float:
    """Green-start shift between two observations, in seconds.

    Returns 0 when the observations agree or when the earlier observation's
    green window has already ended by the newer observation time (no
    overlapping horizon to compare).
    """
    if o_new.t < o_old.t - TIME_EPS:
        raise ValueError("o_new must not precede o_old")
    if o_new.t >= o_old.next_green_end - TIME_EPS:
        return 0.0
    return o_new.next_green_start - o_old.next_green_start
