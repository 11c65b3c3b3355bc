#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Usage:
    python benchmarks/bench_kernels.py [--repeats N]

The same arrays are fed to both implementations; numba timings exclude the
first (compiling) call.
"""

import argparse
import time

import numpy as np

from ecodrive import _kernels as K


def _time(fn, args, repeats):
    fn(*args)  # warm-up / JIT compile
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def solver_args(n=380):
    rng = np.random.default_rng(0)
    j = rng.uniform(-1.0, 1.0, n)
    z = np.zeros(n + 1)
    return (
        j, 0.1, 0.0, 5.0, 0.0, 160.0, 5.0,
        0.15, 0.0025, 0.00006, 0.00035, 0.0004,
        0.0, 15.0, -3.0, 3.0,
        1.0, -0.5, 10.0,
        z, z, z, z, 10.0,
    )


def dp_args(n_steps=380):
    pos = np.arange(0.0, 162.0, 1.0)
    vel = np.arange(0.0, 15.01, 0.25)
    accels = np.array([-3.0, -1.5, 0.0, 1.5, 3.0])
    return (
        pos, vel, accels, n_steps, 0.1,
        0.15, 0.0025, 0.00006, 0.00035, 0.0004,
        0.0, 15.0, 160.0, 5.0, 1.0, 0.25,
    )


def exhaustive_args(n_steps=9):
    accels = np.array([-1.0, 0.0, 1.0])
    return (
        accels, n_steps, 0.5, 0.0, 4.0,
        0.15, 0.0025, 0.00006, 0.00035, 0.0004,
        0.0, 15.0, 18.0, 4.0, 0.51, 0.26,
        True, 0.0, 0.5, 50, 0.0, 0.25, 61,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    cases = [
        ("value_grad (n=380)", K._value_grad_numpy, solver_args(), args.repeats),
        ("dp_sweep (380x163x61x5)", K._dp_sweep_numpy, dp_args(), max(3, args.repeats // 10)),
        ("exhaustive (3^9 paths)", K._exhaustive_numpy, exhaustive_args(), max(3, args.repeats // 10)),
    ]
    jit_fns = {}
    if K.USE_NUMBA:
        jit_fns = {
            "value_grad (n=380)": K.value_grad_numba,
            "dp_sweep (380x163x61x5)": K.dp_sweep_numba,
            "exhaustive (3^9 paths)": K.exhaustive_numba,
        }
    else:
        print("numba disabled (ECODRIVE_DISABLE_NUMBA); timing numpy path only\n")

    print(f"{'kernel':<28} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, np_fn, fn_args, reps in cases:
        t_np = _time(np_fn, fn_args, reps)
        if name in jit_fns:
            t_nb = _time(jit_fns[name], fn_args, reps)
            print(f"{name:<28} {t_np * 1e3:>10.3f}ms {t_nb * 1e3:>10.3f}ms {t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<28} {t_np * 1e3:>10.3f}ms {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
