import os
import subprocess
import sys

import numpy as np
import pytest

from xcposc import _kernels
from xcposc.netfun import make_loop, make_rlc
from xcposc.sim import realize
from xcposc.xcp import SectorNonlinearity


@pytest.fixture(scope="module")
def system(plant):
    loop = make_loop(make_rlc(100.0, 1.0, 1.0), plant)
    ss = realize(loop.G)
    nl = SectorNonlinearity(5.0, 2.0)
    x0 = np.zeros(ss.n)
    x0[0] = 1e-3
    return ss, nl, x0


def run_kernel(kern, system, nsteps=5000, dt=0.005, threshold=1e9):
    ss, nl, x0 = system
    return kern(ss.A, ss.B, ss.C_out, nl.k_n, nl.I, nl.K, nl.V_sat, x0, dt, nsteps, threshold)


def test_numpy_path_runs(system):
    states, dv, di, diverged = run_kernel(_kernels.rk4_numpy, system)
    assert diverged == -1
    assert states.shape == (5001, 4)
    assert np.max(np.abs(dv)) > 0


@pytest.mark.skipif(_kernels.rk4_numba is None, reason="numba backend unavailable")
def test_backends_agree(system):
    s_np, dv_np, di_np, d_np = run_kernel(_kernels.rk4_numpy, system)
    s_nb, dv_nb, di_nb, d_nb = run_kernel(_kernels.rk4_numba, system)
    assert d_np == d_nb == -1
    scale = np.max(np.abs(s_np))
    assert np.max(np.abs(s_np - s_nb)) <= 1e-9 * scale
    assert np.max(np.abs(dv_np - dv_nb)) <= 1e-9 * max(np.max(np.abs(dv_np)), 1e-12)


def test_each_path_deterministic(system):
    a = run_kernel(_kernels.rk4_numpy, system, nsteps=2000)
    b = run_kernel(_kernels.rk4_numpy, system, nsteps=2000)
    assert np.array_equal(a[0], b[0])
    if _kernels.rk4_numba is not None:
        c = run_kernel(_kernels.rk4_numba, system, nsteps=2000)
        d = run_kernel(_kernels.rk4_numba, system, nsteps=2000)
        assert np.array_equal(c[0], d[0])


def test_divergence_index(system):
    ss, nl, x0 = system
    states, dv, di, diverged = _kernels.rk4_lure(
        ss.A, ss.B, ss.C_out, nl.k_n, nl.I, nl.K, nl.V_sat, x0, 0.005, 5000, 1e-4
    )
    assert diverged >= 0
    assert np.max(np.abs(states[diverged])) > 1e-4


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, XCPOSC_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from xcposc._kernels import active_backend; print(active_backend())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_default_backend_reports_something():
    assert _kernels.active_backend() in ("numba", "numpy")
