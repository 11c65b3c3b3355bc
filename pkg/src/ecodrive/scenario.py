"""Scenario configuration: defaults, validation, and flat key-value file I/O.

Scenario files are TOML documents with one scalar per key and nested sections
for limits, fuel, weights, signal, and disturbance. Unknown keys are
rejected. The documented keys are listed in ``_FIELD_MAP`` below and in the
repository README.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .disturbance import DisturbanceSpec
from .domain import ConfigError, FuelCoefficients, Limits, TIME_EPS, UtilityWeights
from .signals import SignalTimeline


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything an episode needs: geometry, cadence, models, and seed."""

    approach_distance: float = 160.0
    exit_distance: float = 20.0
    v0: float = 5.0
    v_exp: float = 5.0
    v_p: float = 5.0
    dt: float = 0.1
    replan_interval: float = 1.0
    horizon: float = 40.0
    limits: Limits = field(default_factory=Limits)
    fuel: FuelCoefficients = field(default_factory=FuelCoefficients)
    weights: UtilityWeights = field(default_factory=UtilityWeights)
    signal: SignalTimeline = field(default_factory=SignalTimeline)
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    seed: int = 0
    arrival_margin_s: float = 0.0
    feedback_gain: float = 0.5
    v_crawl: float = 0.5
    t_max: float = 300.0

    @property
    def x_light(self) -> float:
        return self.approach_distance

    @property
    def pass_x(self) -> float:
        return self.approach_distance + self.exit_distance


def validate(config: ScenarioConfig) -> ScenarioConfig:
    """Return the config unchanged if every invariant holds.

    Raises ConfigError naming the offending field otherwise.
    """
    if not config.approach_distance > 0:
        raise ConfigError("approach_distance must be positive")
    if config.exit_distance < 0:
        raise ConfigError("exit_distance must be >= 0")
    if not config.dt > 0:
        raise ConfigError("dt must be positive")
    if not config.replan_interval < config.horizon:
        raise ConfigError("replan_interval < horizon is required")
    ratio = config.replan_interval / config.dt
    if abs(ratio - round(ratio)) > TIME_EPS / config.dt:
        raise ConfigError("dt must divide replan_interval")
    config.limits.check()
    config.fuel.check()
    config.weights.check()
    config.signal.check()
    config.disturbance.check()
    lim = config.limits
    for name in ("v0", "v_exp", "v_p"):
        val = getattr(config, name)
        if not (lim.v_min <= val <= lim.v_max):
            raise ConfigError(f"{name} must lie within [v_min, v_max]")
    if config.v_crawl <= 0 or config.v_crawl > config.v_p:
        raise ConfigError("v_crawl must lie in (0, v_p]")
    if config.arrival_margin_s < 0:
        raise ConfigError("arrival_margin_s must be >= 0")
    if config.feedback_gain < 0:
        raise ConfigError("feedback_gain must be >= 0")
    if not config.t_max > 0:
        raise ConfigError("t_max must be positive")
    return config


def default_config(**overrides) -> ScenarioConfig:
    """The baseline intersection scenario; keyword overrides replace fields."""
    return dataclasses.replace(ScenarioConfig(), **overrides)


# section name -> (dataclass type, {file key: field name})
_FIELD_MAP = {
    None: (
        ScenarioConfig,
        {
            "approach_distance": "approach_distance",
            "exit_distance": "exit_distance",
            "v0": "v0",
            "v_exp": "v_exp",
            "v_p": "v_p",
            "dt": "dt",
            "replan_interval": "replan_interval",
            "horizon": "horizon",
            "seed": "seed",
            "arrival_margin_s": "arrival_margin_s",
            "feedback_gain": "feedback_gain",
            "v_crawl": "v_crawl",
            "t_max": "t_max",
        },
    ),
    "limits": (
        Limits,
        {name: name for name in ("v_min", "v_max", "a_min", "a_max", "j_min", "j_max")},
    ),
    "fuel": (
        FuelCoefficients,
        {name: name for name in ("alpha", "beta", "gamma", "theta", "eta")},
    ),
    "weights": (UtilityWeights, {"w1": "w1", "w2": "w2"}),
    "signal": (
        SignalTimeline,
        {
            "red_s": "red_s",
            "yellow_s": "yellow_s",
            "green_s": "green_s",
            "extension_phase": "extension_phase",
            "extension_s": "extension_s",
            "announce_at": "announce_at",
            "extension_applies_from_cycle": "extension_applies_from_cycle",
        },
    ),
    "disturbance": (
        DisturbanceSpec,
        {
            "tau": "actuator_tau",
            "delay_steps": "command_delay_steps",
            "accel_sigma": "accel_noise_sigma",
            "meas_sigma_v": "measurement_noise_sigma_v",
        },
    ),
}

_INT_FIELDS = {"seed", "delay_steps", "extension_applies_from_cycle"}


def config_from_dict(data: dict) -> ScenarioConfig:
    top_kwargs = {}
    section_values = {}
    for key, value in data.items():
        if isinstance(value, dict):
            if key not in _FIELD_MAP:
                raise ConfigError(f"unknown scenario section [{key}]")
            cls, fields = _FIELD_MAP[key]
            kwargs = {}
            for k, v in value.items():
                if k not in fields:
                    raise ConfigError(f"unknown key '{k}' in section [{key}]")
                kwargs[fields[k]] = _coerce(k, v)
            section_values[key] = cls(**kwargs)
        else:
            _, fields = _FIELD_MAP[None]
            if key not in fields:
                raise ConfigError(f"unknown scenario key '{key}'")
            top_kwargs[fields[key]] = _coerce(key, value)
    return validate(dataclasses.replace(ScenarioConfig(), **top_kwargs, **section_values))


def _coerce(key: str, value):
    if isinstance(value, bool):
        raise ConfigError(f"key '{key}' must be a number or string")
    if key in _INT_FIELDS:
        if isinstance(value, float) and value != int(value):
            raise ConfigError(f"key '{key}' must be an integer")
        return int(value)
    if isinstance(value, int):
        return float(value)
    return value


def load_scenario(path) -> ScenarioConfig:
    """Read and validate a scenario file."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return config_from_dict(data)


def _fmt(value) -> str:
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def config_to_toml(config: ScenarioConfig) -> str:
    lines = []
    for section, (cls, fields) in _FIELD_MAP.items():
        holder = config if section is None else getattr(config, section)
        if section is not None:
            lines.append("")
            lines.append(f"[{section}]")
        for key, attr in fields.items():
            lines.append(f"{key} = {_fmt(getattr(holder, attr))}")
    return "\n".join(lines).lstrip("\n") + "\n"


def save_scenario(config: ScenarioConfig, path) -> None:
    Path(path).write_text(config_to_toml(config))
