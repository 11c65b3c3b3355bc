"""Discrete-time longitudinal plant executing commands through disturbance channels."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .disturbance import DisturbanceSpec, RandomStream
from .domain import Limits, VehicleState
from .kinematics import step_kinematics


@dataclass
class PlantState:
    """Mutable plant: kinematics plus actuator state.

    ``kinematics.a`` always holds the acceleration most recently applied, so
    measurements expose the vehicle's ongoing acceleration to planners.
    """

    kinematics: VehicleState
    applied_accel: float = 0.0
    delay_buffer: deque = field(default_factory=deque)
    step_index: int = 0


def init_plant(x0: float, v0: float, spec: DisturbanceSpec) -> PlantState:
    """Plant at rest acceleration, with the delay line primed with zeros."""
    return PlantState(
        kinematics=VehicleState(t=0.0, x=x0, v=v0, a=0.0),
        applied_accel=0.0,
        delay_buffer=deque([0.0] * spec.command_delay_steps),
        step_index=0,
    )


def step(
    plant: PlantState,
    a_cmd: float,
    spec: DisturbanceSpec,
    limits: Limits,
    dt: float,
    rng: RandomStream,
) -> PlantState:
    """Advance one step: delay line, first-order lag, noise, clamp, integrate.

    Never raises; every input is clamped into the physical envelope.
    """
    if plant.delay_buffer:
        plant.delay_buffer.append(a_cmd)
        a_delayed = plant.delay_buffer.popleft()
    else:
        a_delayed = a_cmd

    tau = spec.actuator_tau
    if tau < dt / 10.0:
        applied = a_delayed
    else:
        applied = plant.applied_accel + (dt / tau) * (a_delayed - plant.applied_accel)
    if spec.accel_noise_sigma > 0.0:
        applied += rng.truncated_normal(spec.accel_noise_sigma)
    applied = min(max(applied, limits.a_min), limits.a_max)

    k = plant.kinematics
    x2, v2 = step_kinematics(k.x, k.v, applied, dt)
    plant.applied_accel = applied
    plant.step_index += 1
    plant.kinematics = VehicleState(t=plant.step_index * dt, x=x2, v=v2, a=applied)
    return plant


def measure(plant: PlantState, spec: DisturbanceSpec, rng: RandomStream) -> VehicleState:
    """Measured state: exact x and a, speed perturbed by truncated noise."""
    k = plant.kinematics
    v = k.v
    if spec.measurement_noise_sigma_v > 0.0:
        v = max(0.0, v + rng.truncated_normal(spec.measurement_noise_sigma_v))
    return VehicleState(t=k.t, x=k.x, v=v, a=k.a)
