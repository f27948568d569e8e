"""The numba and numpy kernel twins must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from parpf import accel

needs_numba = pytest.mark.skipif(not accel.NUMBA_ENABLED,
                                 reason="numba backend disabled or unavailable")


@pytest.fixture
def rng():
    return np.random.default_rng(99)


@needs_numba
def test_lorenz_paths_bitwise_equal(rng):
    states = rng.normal(size=(257, 3)) * 10.0
    noise = rng.normal(size=(100, 257, 3))
    jit = accel.lorenz_euler_block_numba(states, noise, 1e-3, 10.0, 28.0, 8.0 / 3.0)
    ref = accel.lorenz_euler_block_numpy(states, noise, 1e-3, 10.0, 28.0, 8.0 / 3.0)
    assert np.array_equal(jit, ref)


@needs_numba
def test_fhn_paths_bitwise_equal(rng):
    shape = (33, 16, 16)
    U, V, drive, noise = (rng.normal(size=shape) for _ in range(4))
    cubic = (-1.0, 0.0, 3.6, 0.0)
    beta = (2.1, -0.6, 0.6)
    u1, v1 = accel.fhn_euler_block_numba(U, V, drive, noise, 5e-3, 4.5e-3,
                                         cubic, beta, 0.05)
    u2, v2 = accel.fhn_euler_block_numpy(U, V, drive, noise, 5e-3, 4.5e-3,
                                         cubic, beta, 0.05)
    assert np.array_equal(u1, u2)
    assert np.array_equal(v1, v2)


@needs_numba
def test_resample_paths_agree(rng):
    for n, m in ((1, 5), (10, 10), (1000, 313)):
        w = rng.dirichlet(np.ones(n))
        cum = np.cumsum(w)
        e = rng.standard_exponential(m + 1)
        c = np.cumsum(e)
        u = c[:m] / c[m]
        assert np.array_equal(accel.resample_indices_numba(cum, u),
                              accel.resample_indices_numpy(cum, u))


@needs_numba
def test_resample_tie_handling_matches(rng):
    # zero-weight particle produces a flat CDF segment; both paths must skip it
    cum = np.array([0.2, 0.2, 1.0])
    u = np.array([0.1, 0.2, 0.2000000001, 0.99])
    jit = accel.resample_indices_numba(cum, u)
    ref = accel.resample_indices_numpy(cum, u)
    assert np.array_equal(jit, ref)
    assert not np.any(jit == 1)


def test_env_flag_selects_numpy_backend(tmp_path):
    # A fresh interpreter with PARPF_NUMBA=0 must fall back to numpy kernels
    # and still produce the exact same filter output.
    script = (
        "import numpy as np\n"
        "from parpf import accel, run_filter\n"
        "from parpf.models import Lorenz63Model, simulate\n"
        "print(accel.backend_name())\n"
        "model = Lorenz63Model()\n"
        "_, obs = simulate(model, 5, 3)\n"
        "out = run_filter(model, obs, 'bootstrap', 40, 7)\n"
        "print(repr(out.estimates.tobytes().hex()))\n"
    )
    env = dict(os.environ)
    results = {}
    for flag in ("1", "0"):
        env["PARPF_NUMBA"] = flag
        proc = subprocess.run([sys.executable, "-c", script], env=env,
                              capture_output=True, text=True, check=True)
        backend, payload = proc.stdout.strip().splitlines()
        results[flag] = (backend, payload)
    assert results["0"][0] == "numpy"
    if accel.NUMBA_ENABLED:
        assert results["1"][0] == "numba"
    assert results["0"][1] == results["1"][1]
