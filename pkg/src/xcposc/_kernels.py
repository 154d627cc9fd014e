"""Hot integration kernel: fixed-step RK4 of the Lur'e loop x' = Ax + B*phi(Cx).

The same source compiles two ways: numba @njit when available (default) and
plain numpy otherwise.  Setting the environment variable XCPOSC_DISABLE_NUMBA
to a non-empty value other than "0" forces the numpy path; the benchmark in
benchmarks/bench_kernels.py compares the two.
"""

from __future__ import annotations

import math
import os

import numpy as np

DISABLE_ENV = "XCPOSC_DISABLE_NUMBA"


def _rk4_lure(A, B, C, kn, tail, K, vsat, x0, dt, nsteps, threshold):
    """Integrate nsteps of RK4; returns (states, dv, di, diverged_step).

    diverged_step is -1 on a clean run, else the first step index whose state
    exceeded the threshold (arrays are filled up to and including that step).
    """
    n = A.shape[0]
    states = np.zeros((nsteps + 1, n))
    dv = np.zeros(nsteps + 1)
    di = np.zeros(nsteps + 1)

    def phi_s(v):
        if tail == 0.0:
            return 0.0
        if v >= vsat:
            return tail
        if v <= -vsat:
            return -tail
        inner = 1.0 - kn * v * v / (4.0 * tail)
        if inner < 0.0:
            inner = 0.0
        return K * v * math.sqrt(inner)

    x = x0.copy()
    states[0] = x
    y = C @ x
    dv[0] = y
    di[0] = phi_s(y)
    diverged = -1
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(nsteps):
        k1 = A @ x + B * phi_s(C @ x)
        x2 = x + half * k1
        k2 = A @ x2 + B * phi_s(C @ x2)
        x3 = x + half * k2
        k3 = A @ x3 + B * phi_s(C @ x3)
        x4 = x + dt * k3
        k4 = A @ x4 + B * phi_s(C @ x4)
        x = x + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[step + 1] = x
        y = C @ x
        dv[step + 1] = y
        di[step + 1] = phi_s(y)
        m = 0.0
        for i in range(n):
            a = abs(x[i])
            if a > m:
                m = a
        if m > threshold:
            diverged = step + 1
            break
    return states, dv, di, diverged


rk4_numpy = _rk4_lure

rk4_numba = None
_disabled = os.environ.get(DISABLE_ENV, "").strip() not in ("", "0")
if not _disabled:
    try:
        import numba

        rk4_numba = numba.njit(cache=True)(_rk4_lure)
    except ImportError:
        rk4_numba = None


def active_backend() -> str:
    """Name of the kernel implementation integrate() will use."""
    return "numba" if rk4_numba is not None else "numpy"


def rk4_lure(A, B, C, kn, tail, K, vsat, x0, dt, nsteps, threshold):
    """Dispatch to the active backend."""
    kern = rk4_numba if rk4_numba is not None else rk4_numpy
    return kern(A, B, C, kn, tail, K, vsat, x0, float(dt), int(nsteps), float(threshold))
