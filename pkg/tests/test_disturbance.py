import dataclasses

import numpy as np
import pytest

import ecodrive as ed
from ecodrive.signals import Phase, SignalObservation


def cruise(n, dt=0.1, v=5.0, t0=0.0, x0=0.0):
    t = t0 + dt * np.arange(n)
    return ed.Trajectory(t, x0 + v * (t - t0), np.full(n, v), np.zeros(n), dt)


def test_control_error_identity_is_zero():
    a = cruise(50)
    z = ed.control_error_series(a, cruise(50))
    assert len(z) == 50
    assert np.all(z.x == 0.0) and np.all(z.v == 0.0) and np.all(z.a == 0.0)


def test_control_error_reports_offset():
    planned = cruise(30)
    executed = ed.Trajectory(planned.t, planned.x + 0.3, planned.v, planned.a, planned.dt)
    z = ed.control_error_series(executed, planned)
    assert z.x[10] == pytest.approx(0.3)


def test_control_error_restricted_to_overlap():
    executed = cruise(50, t0=0.0)
    planned = cruise(50, t0=2.0, x0=10.0)
    z = ed.control_error_series(executed, planned)
    assert len(z) == 30
    assert z.t[0] == pytest.approx(2.0)


def test_control_error_timestamp_mismatch():
    a = cruise(20, dt=0.1)
    b = cruise(20, dt=0.2)
    with pytest.raises(ValueError, match="timestamp mismatch"):
        ed.control_error_series(a, b)


def _obs(t, start, end):
    return SignalObservation(t=t, current_phase=Phase.RED, next_green_start=start, next_green_end=end)


def test_external_deviation_examples():
    same = _obs(10.0, 38.0, 93.1)
    assert ed.external_deviation(same, same) == 0.0
    assert ed.external_deviation(_obs(21.0, 42.0, 97.1), _obs(20.0, 38.0, 93.1)) == pytest.approx(4.0)
    assert ed.external_deviation(_obs(21.0, 44.0, 99.1), _obs(20.0, 38.0, 93.1)) == pytest.approx(6.0)


def test_external_deviation_requires_order():
    with pytest.raises(ValueError):
        ed.external_deviation(_obs(5.0, 38.0, 93.1), _obs(10.0, 38.0, 93.1))


def test_external_deviation_disjoint_horizon_is_zero():
    late = _obs(95.0, 131.1, 186.2)
    early = _obs(10.0, 38.0, 93.1)
    assert ed.external_deviation(late, early) == 0.0


def test_random_stream_reproducible():
    a = ed.RandomStream(42)
    b = ed.RandomStream(42)
    xs = [a.truncated_normal(0.5) for _ in range(100)]
    ys = [b.truncated_normal(0.5) for _ in range(100)]
    assert xs == ys
    assert a.counter == 100


def test_random_stream_truncates_at_four_sigma():
    rng = ed.RandomStream(0)
    draws = np.array([rng.truncated_normal(1.0) for _ in range(5000)])
    assert np.max(np.abs(draws)) <= 4.0


def test_spec_validation():
    with pytest.raises(ed.ConfigError):
        ed.DisturbanceSpec(actuator_tau=-0.1).check()
    assert ed.DisturbanceSpec().is_zero
    assert not dataclasses.replace(ed.DisturbanceSpec(), accel_noise_sigma=0.1).is_zero
