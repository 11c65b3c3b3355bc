import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

import ecodrive as ed
from ecodrive.scenario import config_from_dict, config_to_toml, load_scenario, save_scenario


def make_traj(n=20, dt=0.1, v=5.0):
    t = dt * np.arange(n)
    return ed.Trajectory(t, v * t, np.full(n, v), np.zeros(n), dt)


def test_trajectory_requires_uniform_spacing():
    with pytest.raises(ValueError):
        ed.Trajectory([0.0, 0.1, 0.3], [0, 1, 2], [1, 1, 1], [0, 0, 0], 0.1)


def test_trajectory_rejects_negative_speed():
    with pytest.raises(ValueError):
        ed.Trajectory([0.0, 0.1], [0, 1], [1.0, -0.5], [0, 0], 0.1)


def test_trajectory_rejects_empty():
    with pytest.raises(ValueError):
        ed.Trajectory([], [], [], [], 0.1)


@given(
    start=st.integers(min_value=0, max_value=18),
    length=st.integers(min_value=1, max_value=19),
)
def test_trajectory_slice_is_valid_trajectory(start, length):
    traj = make_traj(n=20)
    t1 = traj.t[start] - traj.dt / 2
    t2 = min(traj.t[start] + length * traj.dt, traj.t[-1]) + traj.dt / 4
    sliced = traj.slice_time(t1, t2)
    assert len(sliced) >= 1
    assert sliced.dt == traj.dt
    assert sliced.t[0] >= t1


def test_slice_time_is_half_open():
    traj = make_traj(n=5)
    part = traj.slice_time(traj.t[1], traj.t[3])
    assert part.t[0] == pytest.approx(traj.t[2])
    assert part.t[-1] == pytest.approx(traj.t[3])


def test_plan_requires_issue_alignment():
    traj = make_traj(n=11)
    with pytest.raises(ValueError):
        ed.Plan(issued_at=0.5, horizon=1.0, traj=traj)
    plan = ed.Plan(issued_at=0.0, horizon=1.0, traj=traj)
    assert plan.index_at(0.3) == 3


def test_plan_must_cover_horizon():
    traj = make_traj(n=5)
    with pytest.raises(ValueError):
        ed.Plan(issued_at=0.0, horizon=2.0, traj=traj)


def test_validate_accepts_default_scenario():
    cfg = ed.default_config()
    assert ed.validate(cfg) is cfg
    assert cfg.approach_distance == 160.0
    assert cfg.v0 == 5.0


def test_validate_rejects_replan_equal_horizon():
    cfg = ed.default_config(replan_interval=40.0, horizon=40.0)
    with pytest.raises(ed.ConfigError, match="replan_interval < horizon"):
        ed.validate(cfg)


def test_validate_rejects_negative_vmin():
    cfg = ed.default_config(limits=ed.Limits(v_min=-1.0))
    with pytest.raises(ed.ConfigError, match="v_min"):
        ed.validate(cfg)


def test_validate_rejects_nondivisible_dt():
    cfg = ed.default_config(dt=0.3)
    with pytest.raises(ed.ConfigError):
        ed.validate(cfg)


def test_weights_not_both_zero():
    with pytest.raises(ed.ConfigError):
        ed.validate(ed.default_config(weights=ed.UtilityWeights(w1=0.0, w2=0.0)))


def test_scenario_roundtrip_via_toml(tmp_path):
    cfg = ed.default_config(
        seed=7,
        v0=4.5,
        signal=dataclasses.replace(ed.SignalTimeline(), extension_s=4.0, announce_at=21.5),
        disturbance=ed.DisturbanceSpec(actuator_tau=0.25, command_delay_steps=2, accel_noise_sigma=0.01),
    )
    path = tmp_path / "scenario.toml"
    save_scenario(cfg, path)
    loaded = load_scenario(path)
    assert loaded == cfg


def test_scenario_rejects_unknown_keys():
    with pytest.raises(ed.ConfigError, match="unknown"):
        config_from_dict({"not_a_key": 1.0})
    with pytest.raises(ed.ConfigError, match="unknown"):
        config_from_dict({"signal": {"frobnicate": 2.0}})


def test_toml_text_contains_sections():
    text = config_to_toml(ed.default_config())
    for section in ("[limits]", "[fuel]", "[weights]", "[signal]", "[disturbance]"):
        assert section in text
