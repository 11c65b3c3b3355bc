"""Hot numeric kernels with numba acceleration and a pure-numpy fallback.

Two inner loops dominate runtime: the jerk-transcription value/gradient
evaluation driving the trajectory solver, and the backward dynamic-programming
sweep of the lattice oracle. Each ships in two interchangeable
implementations: numba ``@njit`` loops (the default whenever numba imports)
and vectorized pure numpy. Set ``ECODRIVE_DISABLE_NUMBA=1`` to force the
numpy path; ``BACKEND`` reports which one is active.
``benchmarks/bench_kernels.py`` times the two side by side.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

_FLAG = os.environ.get("ECODRIVE_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = _HAVE_NUMBA and _FLAG not in ("1", "true", "yes")
BACKEND = "numba" if USE_NUMBA else "numpy"

_BOX_EPS = 1e-9


def rollout_jerk(jerks: np.ndarray, dt: float, x0: float, v0: float, a0: float):
    """Roll the exact forward recursion from a jerk sequence.

    Returns (x, v, a) arrays of length ``len(jerks) + 1``; state ``k`` is the
    state at time ``k * dt`` and ``a[k]`` acts over step ``k``.
    """
    n = len(jerks)
    a = np.empty(n + 1)
    a[0] = a0
    if n:
        a[1:] = a0 + dt * np.cumsum(jerks)
    v = np.empty(n + 1)
    v[0] = v0
    if n:
        v[1:] = v0 + dt * np.cumsum(a[:-1])
    x = np.empty(n + 1)
    x[0] = x0
    if n:
        x[1:] = x0 + np.cumsum(v[:-1] * dt + 0.5 * dt * dt * a[:-1])
    return x, v, a


# ---------------------------------------------------------------------------
# solver kernel: augmented-Lagrangian value and analytic gradient over jerks
# ---------------------------------------------------------------------------


def _value_grad_py(
    j,
    dt,
    x0,
    v0,
    a0,
    x_goal,
    v_goal,
    alpha,
    beta,
    gamma,
    theta,
    eta,
    v_min,
    v_max,
    a_min,
    a_max,
    lam_x,
    lam_v,
    rho_eq,
    lam_vh,
    lam_vl,
    lam_ah,
    lam_al,
    rho_in,
):
    n = j.shape[0]
    a = np.empty(n + 1)
    v = np.empty(n + 1)
    x = np.empty(n + 1)
    a[0] = a0
    v[0] = v0
    x[0] = x0
    for k in range(n):
        x[k + 1] = x[k] + v[k] * dt + 0.5 * a[k] * dt * dt
        v[k + 1] = v[k] + a[k] * dt
        a[k + 1] = a[k] + j[k] * dt

    hx = x[n] - x_goal
    hv = v[n] - v_goal

    gx = np.zeros(n + 1)
    gv = np.empty(n + 1)
    ga = np.empty(n + 1)
    energy = 0.0
    box_terms = 0.0
    viol = 0.0
    inv2rho = 0.5 / rho_in
    for k in range(n + 1):
        vk = v[k]
        ak = a[k]
        energy += alpha + beta * vk + gamma * vk * vk + theta * vk * ak + eta * ak * ak
        gvk = (beta + 2.0 * gamma * vk + theta * ak) * dt
        gak = (theta * vk + 2.0 * eta * ak) * dt

        p = lam_vh[k] + rho_in * (vk - v_max)
        if p > 0.0:
            box_terms += (p * p - lam_vh[k] * lam_vh[k]) * inv2rho
            gvk += p
        else:
            box_terms -= lam_vh[k] * lam_vh[k] * inv2rho
        p = lam_vl[k] + rho_in * (v_min - vk)
        if p > 0.0:
            box_terms += (p * p - lam_vl[k] * lam_vl[k]) * inv2rho
            gvk -= p
        else:
            box_terms -= lam_vl[k] * lam_vl[k] * inv2rho
        p = lam_ah[k] + rho_in * (ak - a_max)
        if p > 0.0:
            box_terms += (p * p - lam_ah[k] * lam_ah[k]) * inv2rho
            gak += p
        else:
            box_terms -= lam_ah[k] * lam_ah[k] * inv2rho
        p = lam_al[k] + rho_in * (a_min - ak)
        if p > 0.0:
            box_terms += (p * p - lam_al[k] * lam_al[k]) * inv2rho
            gak -= p
        else:
            box_terms -= lam_al[k] * lam_al[k] * inv2rho

        if vk - v_max > viol:
            viol = vk - v_max
        if v_min - vk > viol:
            viol = v_min - vk
        if ak - a_max > viol:
            viol = ak - a_max
        if a_min - ak > viol:
            viol = a_min - ak

        gv[k] = gvk
        ga[k] = gak

    energy *= dt
    value = energy + box_terms + lam_x * hx + lam_v * hv + 0.5 * rho_eq * (hx * hx + hv * hv)
    gx[n] += lam_x + rho_eq * hx
    gv[n] += lam_v + rho_eq * hv

    gj = np.empty(n)
    Ax = 0.0
    Av = 0.0
    Aa = 0.0
    for k in range(n, -1, -1):
        Ax += gx[k]
        Av += gv[k]
        Aa += ga[k]
        if k > 0:
            gj[k - 1] = Aa * dt
            Aa += Av * dt + Ax * 0.5 * dt * dt
            Av += Ax * dt
    if viol < 0.0:
        viol = 0.0
    return value, gj, energy, hx, hv, viol


def _value_grad_numpy(
    j,
    dt,
    x0,
    v0,
    a0,
    x_goal,
    v_goal,
    alpha,
    beta,
    gamma,
    theta,
    eta,
    v_min,
    v_max,
    a_min,
    a_max,
    lam_x,
    lam_v,
    rho_eq,
    lam_vh,
    lam_vl,
    lam_ah,
    lam_al,
    rho_in,
):
    n = j.shape[0]
    x, v, a = rollout_jerk(j, dt, x0, v0, a0)
    hx = x[n] - x_goal
    hv = v[n] - v_goal

    energy = dt * float(np.sum(alpha + beta * v + gamma * v * v + theta * v * a + eta * a * a))
    gv = (beta + 2.0 * gamma * v + theta * a) * dt
    ga = (theta * v + 2.0 * eta * a) * dt
    gx = np.zeros(n + 1)

    inv2rho = 0.5 / rho_in
    box_terms = 0.0
    p = lam_vh + rho_in * (v - v_max)
    pa = np.maximum(p, 0.0)
    box_terms += float(np.sum(pa * pa - lam_vh * lam_vh)) * inv2rho
    gv += pa
    p = lam_vl + rho_in * (v_min - v)
    pa = np.maximum(p, 0.0)
    box_terms += float(np.sum(pa * pa - lam_vl * lam_vl)) * inv2rho
    gv -= pa
    p = lam_ah + rho_in * (a - a_max)
    pa = np.maximum(p, 0.0)
    box_terms += float(np.sum(pa * pa - lam_ah * lam_ah)) * inv2rho
    ga += pa
    p = lam_al + rho_in * (a_min - a)
    pa = np.maximum(p, 0.0)
    box_terms += float(np.sum(pa * pa - lam_al * lam_al)) * inv2rho
    ga -= pa

    viol = max(
        0.0,
        float(np.max(v - v_max)),
        float(np.max(v_min - v)),
        float(np.max(a - a_max)),
        float(np.max(a_min - a)),
    )

    value = energy + box_terms + lam_x * hx + lam_v * hv + 0.5 * rho_eq * (hx * hx + hv * hv)
    gx[n] += lam_x + rho_eq * hx
    gv[n] += lam_v + rho_eq * hv

    gj = adjoint_jerk(gx, gv, ga, dt)
    return value, gj, energy, hx, hv, viol


def adjoint_jerk(gx: np.ndarray, gv: np.ndarray, ga: np.ndarray, dt: float) -> np.ndarray:
    """Pull per-state gradients back onto the jerk variables.

    The forward recursion is linear, so its adjoint reduces to reversed
    cumulative sums of the state gradients.
    """

    def _suffix(y):
        return np.cumsum(y[::-1])[::-1]

    X = _suffix(gx)
    sX = _suffix(X)
    Av = _suffix(gv) + dt * (sX - X)
    Aa = _suffix(ga) + dt * (_suffix(Av) - Av) + 0.5 * dt * dt * (sX - X)
    return dt * Aa[1:]


# ---------------------------------------------------------------------------
# oracle kernels: backward DP sweep and exhaustive path enumeration
# ---------------------------------------------------------------------------


def _dp_sweep_py(
    pos,
    vel,
    accels,
    n_steps,
    dt,
    alpha,
    beta,
    gamma,
    theta,
    eta,
    v_min,
    v_max,
    x_goal,
    v_goal,
    pos_step,
    vel_step,
):
    n_pos = pos.shape[0]
    n_vel = vel.shape[0]
    n_acc = accels.shape[0]
    inf = np.inf

    value = np.empty((n_pos, n_vel))
    for ip in range(n_pos):
        near_x = abs(pos[ip] - x_goal) <= pos_step + _BOX_EPS
        for iv in range(n_vel):
            if near_x and abs(vel[iv] - v_goal) <= vel_step + _BOX_EPS:
                e = alpha + beta * vel[iv] + gamma * vel[iv] * vel[iv]
                if e < 0.0:
                    e = 0.0
                value[ip, iv] = e * dt
            else:
                value[ip, iv] = inf

    choice = np.full((n_steps, n_pos, n_vel), -1, dtype=np.int8)
    for k in range(n_steps - 1, -1, -1):
        newval = np.full((n_pos, n_vel), inf)
        for ip in range(n_pos):
            xk = pos[ip]
            for iv in range(n_vel):
                vk = vel[iv]
                best = inf
                arg = -1
                for ia in range(n_acc):
                    acc = accels[ia]
                    v2 = vk + acc * dt
                    if v2 < v_min - _BOX_EPS or v2 > v_max + _BOX_EPS:
                        continue
                    x2 = xk + vk * dt + 0.5 * acc * dt * dt
                    ip2 = int((x2 - pos[0]) / pos_step + 0.5)
                    if ip2 < 0 or ip2 >= n_pos:
                        continue
                    iv2 = int((v2 - vel[0]) / vel_step + 0.5)
                    if iv2 < 0 or iv2 >= n_vel:
                        continue
                    nxt = value[ip2, iv2]
                    if nxt == inf:
                        continue
                    e = alpha + beta * vk + gamma * vk * vk + theta * vk * acc + eta * acc * acc
                    if e < 0.0:
                        e = 0.0
                    c = e * dt + nxt
                    if c < best:
                        best = c
                        arg = ia
                newval[ip, iv] = best
                choice[k, ip, iv] = arg
        value = newval
    return value, choice


def _dp_sweep_numpy(
    pos,
    vel,
    accels,
    n_steps,
    dt,
    alpha,
    beta,
    gamma,
    theta,
    eta,
    v_min,
    v_max,
    x_goal,
    v_goal,
    pos_step,
    vel_step,
):
    n_pos = pos.shape[0]
    n_vel = vel.shape[0]
    inf = np.inf

    near = (np.abs(pos[:, None] - x_goal) <= pos_step + _BOX_EPS) & (
        np.abs(vel[None, :] - v_goal) <= vel_step + _BOX_EPS
    )
    idle = np.maximum(alpha + beta * vel + gamma * vel * vel, 0.0) * dt
    value = np.where(near, idle[None, :], inf)

    choice = np.full((n_steps, n_pos, n_vel), -1, dtype=np.int8)
    for k in range(n_steps - 1, -1, -1):
        best = np.full((n_pos, n_vel), inf)
        arg = np.full((n_pos, n_vel), -1, dtype=np.int8)
        for ia, acc in enumerate(accels):
            v2 = vel + acc * dt
            ok_v = (v2 >= v_min - _BOX_EPS) & (v2 <= v_max + _BOX_EPS)
            iv2 = ((v2 - vel[0]) / vel_step + 0.5).astype(np.int64)
            ok_v &= (iv2 >= 0) & (iv2 < n_vel)
            iv2c = np.clip(iv2, 0, n_vel - 1)

            x2 = pos[:, None] + (vel * dt + 0.5 * acc * dt * dt)[None, :]
            ip2 = ((x2 - pos[0]) / pos_step + 0.5).astype(np.int64)
            ok = ok_v[None, :] & (ip2 >= 0) & (ip2 < n_pos)
            ip2c = np.clip(ip2, 0, n_pos - 1)

            nxt = value[ip2c, iv2c[None, :]]
            e = np.maximum(alpha + beta * vel + gamma * vel * vel + theta * vel * acc + eta * acc * acc, 0.0)
            cand = np.where(ok, e[None, :] * dt + nxt, inf)
            improve = cand < best
            best = np.where(improve, cand, best)
            arg = np.where(improve, np.int8(ia), arg)
        value = best
        choice[k] = arg
    return value, choice


def _exhaustive_py(
    accels,
    n_steps,
    dt,
    x_start,
    v_start,
    alpha,
    beta,
    gamma,
    theta,
    eta,
    v_min,
    v_max,
    x_goal,
    v_goal,
    pos_tol,
    vel_tol,
    snap,
    pos0,
    pos_step,
    n_pos,
    vel0,
    vel_step,
    n_vel,
):
    n_acc = accels.shape[0]
    total = 1
    for _ in range(n_steps):
        total *= n_acc
    best = np.inf
    best_idx = -1
    e_buf = np.empty(n_steps)
    for idx in range(total):
        code = idx
        x = x_start
        v = v_start
        ok = True
        for k in range(n_steps):
            ia = code % n_acc
            code //= n_acc
            acc = accels[ia]
            e = alpha + beta * v + gamma * v * v + theta * v * acc + eta * acc * acc
            if e < 0.0:
                e = 0.0
            e_buf[k] = e
            x2 = x + v * dt + 0.5 * acc * dt * dt
            v2 = v + acc * dt
            if v2 < v_min - _BOX_EPS or v2 > v_max + _BOX_EPS:
                ok = False
                break
            if snap:
                ip2 = int((x2 - pos0) / pos_step + 0.5)
                iv2 = int((v2 - vel0) / vel_step + 0.5)
                if ip2 < 0 or ip2 >= n_pos or iv2 < 0 or iv2 >= n_vel:
                    ok = False
                    break
                x2 = pos0 + ip2 * pos_step
                v2 = vel0 + iv2 * vel_step
            x = x2
            v = v2
        if not ok:
            continue
        if abs(x - x_goal) > pos_tol or abs(v - v_goal) > vel_tol:
            continue
        term = alpha + beta * v + gamma * v * v
        if term < 0.0:
            term = 0.0
        # accumulate right-to-left so path costs match the DP recursion bitwise
        cost = term * dt
        for k in range(n_steps - 1, -1, -1):
            cost = e_buf[k] * dt + cost
        if cost < best:
            best = cost
            best_idx = idx
    return best, best_idx


def _exhaustive_numpy(
    accels,
    n_steps,
    dt,
    x_start,
    v_start,
    alpha,
    beta,
    gamma,
    theta,
    eta,
    v_min,
    v_max,
    x_goal,
    v_goal,
    pos_tol,
    vel_tol,
    snap,
    pos0,
    pos_step,
    n_pos,
    vel0,
    vel_step,
    n_vel,
):
    n_acc = accels.shape[0]
    total = n_acc**n_steps
    best = np.inf
    best_idx = -1
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        m = idx.shape[0]
        code = idx.copy()
        x = np.full(m, x_start)
        v = np.full(m, v_start)
        ok = np.ones(m, dtype=bool)
        e_steps = np.empty((n_steps, m))
        for k in range(n_steps):
            ia = code % n_acc
            code //= n_acc
            acc = accels[ia]
            e = alpha + beta * v + gamma * v * v + theta * v * acc + eta * acc * acc
            e_steps[k] = np.maximum(e, 0.0)
            x2 = x + v * dt + 0.5 * acc * dt * dt
            v2 = v + acc * dt
            ok &= (v2 >= v_min - _BOX_EPS) & (v2 <= v_max + _BOX_EPS)
            if snap:
                ip2 = ((x2 - pos0) / pos_step + 0.5).astype(np.int64)
                iv2 = ((v2 - vel0) / vel_step + 0.5).astype(np.int64)
                ok &= (ip2 >= 0) & (ip2 < n_pos) & (iv2 >= 0) & (iv2 < n_vel)
                x2 = pos0 + np.clip(ip2, 0, n_pos - 1) * pos_step
                v2 = vel0 + np.clip(iv2, 0, n_vel - 1) * vel_step
            x = np.where(ok, x2, x)
            v = np.where(ok, v2, v)
        ok &= (np.abs(x - x_goal) <= pos_tol) & (np.abs(v - v_goal) <= vel_tol)
        if not np.any(ok):
            continue
        term = np.maximum(alpha + beta * v + gamma * v * v, 0.0)
        cost = term * dt
        for k in range(n_steps - 1, -1, -1):
            cost = e_steps[k] * dt + cost
        cost = np.where(ok, cost, np.inf)
        local = int(np.argmin(cost))
        if cost[local] < best:
            best = float(cost[local])
            best_idx = int(idx[local])
    return best, best_idx


if USE_NUMBA:
    _njit = numba.njit(cache=True, fastmath=False)
    value_grad_numba = _njit(_value_grad_py)
    dp_sweep_numba = _njit(_dp_sweep_py)
    exhaustive_numba = _njit(_exhaustive_py)
    value_grad = value_grad_numba
    dp_sweep = dp_sweep_numba
    exhaustive_scan = exhaustive_numba
else:
    value_grad = _value_grad_numpy
    dp_sweep = _dp_sweep_numpy
    exhaustive_scan = _exhaustive_numpy

value_grad_numpy = _value_grad_numpy
dp_sweep_numpy = _dp_sweep_numpy
exhaustive_numpy = _exhaustive_numpy
