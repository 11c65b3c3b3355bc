"""Discrete longitudinal kinematics shared by the plant and every planner.

All plans are emitted as exact rollouts of these update rules so that a
disturbance-free plant reproduces them to machine precision.
"""

from __future__ import annotations

import numpy as np

from .domain import Plan, Trajectory


def step_kinematics(x: float, v: float, a: float, dt: float):
    """One forward-Euler step; stops exactly when braking would reverse.

    When ``v + a*dt`` would go negative the vehicle covers its exact stopping
    distance ``v**2 / (2|a|)`` and halts, keeping position non-decreasing.
    """
    v2 = v + a * dt
    if v2 < 0.0:
        return (x + 0.5 * v * v / (-a) if a < 0.0 else x), 0.0
    return x + v * dt + 0.5 * a * dt * dt, v2


def rollout_accels(a_seq: np.ndarray, x0: float, v0: float, dt: float):
    """Roll the raw (unclamped) recursion from an acceleration sequence.

    Returns (x, v) arrays of length ``len(a_seq) + 1``. Callers are expected
    to keep planned speeds non-negative; the raw recursion then matches the
    plant exactly.
    """
    n = len(a_seq)
    v = np.empty(n + 1)
    v[0] = v0
    if n:
        v[1:] = v0 + dt * np.cumsum(a_seq)
    x = np.empty(n + 1)
    x[0] = x0
    if n:
        x[1:] = x0 + np.cumsum(v[:-1] * dt + 0.5 * dt * dt * a_seq)
    return x, v


def terminal_corrected(a_seq: np.ndarray, x0: float, v0: float, dt: float, x_end: float, v_end: float):
    """Nudge an acceleration sequence so its rollout hits (x_end, v_end) exactly.

    The dynamics are linear in the accelerations, so a constant plus a ramp
    correction solves the two terminal conditions in closed form. Corrections
    are tiny (they absorb the O(dt^2) gap between a sampled smooth profile and
    the discrete recursion), so box margins are unaffected in practice.
    """
    a_seq = np.asarray(a_seq, dtype=float)
    n = len(a_seq)
    x, v = rollout_accels(a_seq, x0, v0, dt)
    ex = x_end - x[-1]
    ev = v_end - v[-1]
    if n < 2:
        return a_seq, x, v
    k = np.arange(n)
    u1 = np.ones(n)
    u2 = k / max(n - 1, 1)
    w = dt * dt * (n - k - 0.5)
    m = np.array(
        [
            [float(np.dot(w, u1)), float(np.dot(w, u2))],
            [dt * float(u1.sum()), dt * float(u2.sum())],
        ]
    )
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < 1e-12:
        return a_seq, x, v
    c = np.linalg.solve(m, np.array([ex, ev]))
    corrected = a_seq + c[0] * u1 + c[1] * u2
    x2, v2 = rollout_accels(corrected, x0, v0, dt)
    return corrected, x2, v2


def extend_with_cruise(a_seq: np.ndarray, n_total: int) -> np.ndarray:
    """Pad an acceleration sequence with zeros (constant-speed extrapolation)."""
    n = len(a_seq)
    if n >= n_total:
        return np.asarray(a_seq[:n_total], dtype=float)
    out = np.zeros(n_total)
    out[:n] = a_seq
    return out


def ramp_accels(v0: float, v_target: float, n: int, dt: float, a_rate: float) -> np.ndarray:
    """Accelerations that chase v_target at up to a_rate, then hold it."""
    out = np.zeros(n)
    v = v0
    for k in range(n):
        a = (v_target - v) / dt
        a = min(max(a, -a_rate), a_rate)
        out[k] = a
        v = v + a * dt
    return out


def plan_from_accels(issued_at: float, a_seq: np.ndarray, x0: float, v0: float, dt: float, horizon: float) -> Plan:
    """Build a Plan whose states are the exact rollout of ``a_seq``.

    The sequence is zero-padded to cover the horizon; the terminal state
    carries a = 0 (no further command).
    """
    n_total = int(round(horizon / dt))
    a_seq = extend_with_cruise(np.asarray(a_seq, dtype=float), n_total)
    x, v = rollout_accels(a_seq, x0, v0, dt)
    t = issued_at + dt * np.arange(n_total + 1)
    a_states = np.append(a_seq, 0.0)
    traj = Trajectory(t, x, v, a_states, dt)
    return Plan(issued_at=issued_at, horizon=horizon, traj=traj)


def plan_from_segments(issued_at: float, segments, x0: float, v0: float, dt: float, horizon: float) -> Plan:
    """Build a Plan from (a_seq, pin) segments with exact joint states.

    A non-None ``pin = (x_end, v_end)`` overwrites the segment's terminal
    state, absorbing correction dust so holds stay exactly at rest. The
    assembly is cruise-padded or truncated to the horizon.
    """
    n_total = int(round(horizon / dt))
    xs = [np.array([x0])]
    vs = [np.array([v0])]
    accs = []
    x, v = x0, v0
    n_done = 0
    for a_seq, pin in segments:
        a_seq = np.asarray(a_seq, dtype=float)
        xr, vr = rollout_accels(a_seq, x, v, dt)
        if pin is not None:
            xr[-1], vr[-1] = pin
        xs.append(xr[1:])
        vs.append(vr[1:])
        accs.append(a_seq)
        x, v = float(xr[-1]), float(vr[-1])
        n_done += len(a_seq)
        if n_done >= n_total:
            break
    if n_done < n_total:
        rem = n_total - n_done
        accs.append(np.zeros(rem))
        xs.append(x + v * dt * np.arange(1, rem + 1))
        vs.append(np.full(rem, v))
    x_all = np.concatenate(xs)[: n_total + 1]
    v_all = np.concatenate(vs)[: n_total + 1]
    a_all = np.append(np.concatenate(accs)[:n_total], 0.0)
    t = issued_at + dt * np.arange(n_total + 1)
    traj = Trajectory(t, x_all, v_all, a_all, dt)
    return Plan(issued_at=issued_at, horizon=horizon, traj=traj)
