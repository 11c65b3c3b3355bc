import numpy as np
import pytest

import ecodrive as ed
from ecodrive import optimal as op
from ecodrive.signals import Phase, SignalObservation

LIMITS = ed.Limits()
FUEL = ed.FuelCoefficients()


def problem_381():
    state = ed.VehicleState(0.0, 0.0, 5.0, 0.0)
    return op.build(state, 38.0, 5.0, 160.0, LIMITS, FUEL, 0.1)


def test_build_step_count():
    p = problem_381()
    assert p.n_steps == 380
    assert p.x_goal - p.x0 == 160.0
    assert p.v_goal == 5.0


def test_build_rejects_short_horizon():
    state = ed.VehicleState(0.0, 0.0, 5.0, 0.0)
    with pytest.raises(ed.PlanningError, match="horizon too short"):
        op.build(state, 0.0, 5.0, 160.0, LIMITS, FUEL, 0.1)
    with pytest.raises(ed.PlanningError, match="horizon too short"):
        op.build(state, 0.1, 5.0, 160.0, LIMITS, FUEL, 0.1)


def test_build_clamps_initial_accel_for_speed_box():
    state = ed.VehicleState(0.0, 150.0, 0.01, -0.4)
    p = op.build(state, 5.0, 5.0, 160.0, LIMITS, FUEL, 0.1)
    assert p.v0 + p.a0 * p.dt >= LIMITS.v_min - 1e-12


def test_gradient_matches_finite_differences():
    p = op.build(ed.VehicleState(0.0, 0.0, 4.0, 0.0), 5.0, 5.0, 30.0, LIMITS, FUEL, 0.1)
    rng = np.random.default_rng(3)
    for _ in range(10):
        j = rng.uniform(-1.5, 1.5, p.n_steps)
        _obj, grad = op.objective_and_gradient(p, j)
        fd = np.empty_like(grad)
        h = 1e-5
        for k in range(p.n_steps):
            jp = j.copy()
            jp[k] += h
            jm = j.copy()
            jm[k] -= h
            fd[k] = (op.objective_and_gradient(p, jp)[0] - op.objective_and_gradient(p, jm)[0]) / (2 * h)
        rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
        assert rel < 1e-5


def test_forced_cruise_objective():
    # v boxed at 5 and duration d/v: the only feasible profile is the cruise
    lim = ed.Limits(v_min=5.0, v_max=5.0, a_min=-3.0, a_max=3.0)
    state = ed.VehicleState(0.0, 0.0, 5.0, 0.0)
    p = op.build(state, 32.0, 5.0, 160.0, lim, FUEL, 0.1)
    plan, report = op.solve(p)
    assert report.converged
    cruise = p.n_steps * p.dt * ed.fuel_rate(5.0, 0.0, FUEL)
    assert report.objective == pytest.approx(cruise, rel=0.02)
    assert np.all(np.abs(plan.traj.v - 5.0) < 1e-6)


def test_solve_beats_brake_and_go_heuristic():
    p = problem_381()
    plan, report = op.solve(p)
    assert report.converged
    # hand-built feasible profile: cruise at 5, brake to a crawl, resume
    dt = p.dt
    accels = np.zeros(p.n_steps)
    accels[200:215] = -2.0
    accels[359:374] = 2.0
    from ecodrive.kinematics import terminal_corrected

    corrected, x, v = terminal_corrected(accels, 0.0, 5.0, dt, 160.0, 5.0)
    rates = FUEL.alpha + FUEL.beta * v + FUEL.gamma * v * v
    heuristic = float(np.sum(rates) * dt)
    assert report.objective <= heuristic + 1e-6


def test_solve_terminal_residuals_and_boxes():
    plan, report = op.solve(problem_381())
    assert report.converged
    assert report.max_equality_residual < 1e-4
    assert report.max_box_violation < 1e-8
    traj = plan.traj
    assert traj.x[-1] == pytest.approx(160.0, abs=1e-4)
    assert traj.v[-1] == pytest.approx(5.0, abs=1e-4)
    assert np.all(traj.v >= -1e-9) and np.all(traj.v <= LIMITS.v_max + 1e-6)
    assert np.all(traj.a >= LIMITS.a_min - 1e-6) and np.all(traj.a <= LIMITS.a_max + 1e-6)


def test_plan_dynamics_residual_free():
    plan, _ = op.solve(problem_381())
    traj = plan.traj
    dt = traj.dt
    x_pred = traj.x[:-1] + traj.v[:-1] * dt + 0.5 * traj.a[:-1] * dt * dt
    v_pred = traj.v[:-1] + traj.a[:-1] * dt
    assert np.max(np.abs(traj.x[1:] - x_pred)) < 1e-12
    # terminal state stores a=0 for the extension; check the recursion via diffs
    assert np.max(np.abs(traj.v[1:-1] - v_pred[:-1])) < 1e-12


def test_objective_equals_metrics_energy():
    plan, report = op.solve(problem_381())
    assert report.objective == pytest.approx(ed.energy(plan.traj, FUEL), abs=1e-9)


def test_descent_from_feasible_warm_start():
    p = problem_381()
    plan, report = op.solve(p)
    warm = np.diff(plan.traj.a) / p.dt  # solve-window plans carry the full accel chain
    _plan2, report2 = op.solve(p, warm_start=warm)
    assert report2.objective <= report.objective + 1e-9


def test_unreachable_terminal_raises():
    state = ed.VehicleState(0.0, 0.0, 1.0, 0.0)
    p = op.build(state, 3.0, 5.0, 160.0, LIMITS, FUEL, 0.1)  # 160 m in 3 s
    with pytest.raises(ed.PlanningError, match="terminal state unreachable"):
        op.solve(p)


def _obs(t, g0, g1, phase=Phase.RED):
    return SignalObservation(t=t, current_phase=phase, next_green_start=g0, next_green_end=g1)


def test_plan_past_line_is_cruise():
    state = ed.VehicleState(40.0, 165.0, 5.0, 0.0)
    plan = op.plan(state, _obs(40.0, 38.0, 93.1, Phase.GREEN), LIMITS, FUEL, 5.0, 40.0, 0.1, 160.0, 20.0)
    assert np.all(plan.traj.v == pytest.approx(5.0))


def test_plan_arrives_at_green_start():
    state = ed.VehicleState(0.0, 0.0, 5.0, 0.0)
    plan = op.plan(state, _obs(0.0, 38.0, 93.1), LIMITS, FUEL, 5.0, 40.0, 0.1, 160.0, 20.0)
    idx = plan.index_at(38.0)
    assert plan.traj.x[idx] == pytest.approx(160.0, abs=1e-3)
    assert plan.traj.v[idx] == pytest.approx(5.0, abs=1e-3)
    before = plan.traj.x[plan.traj.t < 38.0 - 1e-9]
    assert np.all(before <= 160.0 + 1e-9)


def test_replan_shifts_arrival_with_extension():
    cfg = ed.default_config()
    ctrl = op.OptimalController.from_scenario(cfg)
    state = ed.VehicleState(0.0, 0.0, 5.0, 0.0)
    p0 = ctrl.plan(state, _obs(0.0, 38.0, 93.1))
    i0 = np.argmax(p0.traj.x >= 160.0 - 1e-9)
    state2 = ed.VehicleState(21.0, float(p0.traj.x[210]), float(p0.traj.v[210]), float(p0.traj.a[210]))
    p1 = ctrl.plan(state2, _obs(21.0, 42.0, 97.1))
    i1 = np.argmax(p1.traj.x >= 160.0 - 1e-9)
    assert p1.traj.t[i1] - p0.traj.t[i0] == pytest.approx(4.0, abs=0.2)


def test_solver_handles_stop_and_wait_inside_window():
    # arrival fixed far out: the box allows a stop-and-creep profile
    state = ed.VehicleState(0.0, 0.0, 5.0, 0.0)
    p = op.build(state, 70.0, 5.0, 160.0, LIMITS, FUEL, 0.1)
    plan, report = op.solve(p)
    assert report.converged
    assert plan.traj.v.min() < 2.0  # must slow far below cruise to burn 70 s
    assert np.all(plan.traj.v >= -1e-9)
