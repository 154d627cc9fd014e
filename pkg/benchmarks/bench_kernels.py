#!/usr/bin/env python3
"""Benchmark the RK4 Lur'e kernel: numba @njit vs the pure-numpy fallback.

Builds the 4th-order closed loop from the packaged design1 config and times
both kernel backends on the same inputs.  Run:

    python benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import time

import numpy as np

from xcposc import _kernels
from xcposc.cli import build_design, golden_config_path, load_config
from xcposc.sim import realize, suggested_timestep


def build_system():
    design = build_design(load_config(golden_config_path("design1")))
    loop = design.loop()
    ss = realize(loop.G)
    dt = suggested_timestep(ss, 1.0)
    x0 = np.zeros(ss.n)
    x0[0] = 1e-3
    nl = design.nl
    return ss, nl, x0, dt


def run(kern, ss, nl, x0, dt, nsteps):
    t0 = time.perf_counter()
    states, dv, di, diverged = kern(
        ss.A, ss.B, ss.C_out, nl.k_n, nl.I, nl.K, nl.V_sat, x0, dt, nsteps, 1e12
    )
    elapsed = time.perf_counter() - t0
    assert diverged == -1
    return elapsed, dv


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=200_000)
    args = parser.parse_args()

    ss, nl, x0, dt, = build_system()
    n = args.steps
    print(f"system order {ss.n}, dt={dt:g}, {n} steps")

    t_np, dv_np = run(_kernels.rk4_numpy, ss, nl, x0, dt, n)
    print(f"numpy fallback : {t_np:8.3f} s  ({n / t_np:,.0f} steps/s)")

    if _kernels.rk4_numba is None:
        print("numba backend  : unavailable (disabled by XCPOSC_DISABLE_NUMBA or not installed)")
        return

    run(_kernels.rk4_numba, ss, nl, x0, dt, min(n, 16))  # trigger compilation
    t_nb, dv_nb = run(_kernels.rk4_numba, ss, nl, x0, dt, n)
    print(f"numba @njit    : {t_nb:8.3f} s  ({n / t_nb:,.0f} steps/s)")
    print(f"speedup        : {t_np / t_nb:8.1f}x")
    drift = np.max(np.abs(dv_np - dv_nb))
    print(f"max |dv| difference between backends: {drift:.3e}")


if __name__ == "__main__":
    main()
