"""Hot numeric kernels with twin numba / pure-numpy implementations.

The inner loops that dominate runtime (Euler propagation of the particle
clouds and the resampling index merge) exist in two functionally identical
versions:

* a ``numba.njit``-compiled loop (default), and
* a vectorised pure-numpy fallback.

Set the environment variable ``PARPF_NUMBA=0`` before import to force the
numpy path (useful on platforms where numba is unavailable or while
debugging).  Both paths consume pre-generated random draws and perform the
floating-point operations in the same order, so they produce bit-identical
results; ``benchmarks/kernel_bench.py`` times the two and checks agreement.

All kernels are pure functions of their inputs.  Randomness never enters
here: callers draw noise/uniforms from their ``numpy.random.Generator`` and
pass them in, which keeps seeding semantics independent of the dispatch.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _numba_requested() -> bool:
    flag = os.environ.get("PARPF_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:  # identity decorator so the jit twins stay importable

    def njit(*args, **kwargs):  # noqa: D103
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# ---------------------------------------------------------------------------
# Lorenz 63 Euler block
# ---------------------------------------------------------------------------


def lorenz_euler_block_numpy(states, noise, dt, s, r, b):
    """Advance (n, 3) states by ``noise.shape[0]`` Euler substeps.

    ``noise[k, i, :]`` are the standard-normal increments of substep k for
    particle i, scaled internally by sqrt(dt).
    """
    out = np.array(states, dtype=np.float64, copy=True)
    sq = math.sqrt(dt)
    n_sub = noise.shape[0]
    for k in range(n_sub):
        x1 = out[:, 0]
        x2 = out[:, 1]
        x3 = out[:, 2]
        n1 = x1 - (dt * s) * (x1 - x2) + sq * noise[k, :, 0]
        n2 = x2 + dt * (r * x1 - x2 - x1 * x3) + sq * noise[k, :, 1]
        n3 = x3 + dt * (x1 * x2 - b * x3) + sq * noise[k, :, 2]
        out[:, 0] = n1
        out[:, 1] = n2
        out[:, 2] = n3
    return out


@njit(cache=True)
def _lorenz_euler_block_jit(states, noise, dt, s, r, b):  # pragma: no cover
    out = states.copy()
    sq = math.sqrt(dt)
    n_sub = noise.shape[0]
    n = states.shape[0]
    for k in range(n_sub):
        for i in range(n):
            x1 = out[i, 0]
            x2 = out[i, 1]
            x3 = out[i, 2]
            out[i, 0] = x1 - (dt * s) * (x1 - x2) + sq * noise[k, i, 0]
            out[i, 1] = x2 + dt * (r * x1 - x2 - x1 * x3) + sq * noise[k, i, 1]
            out[i, 2] = x3 + dt * (x1 * x2 - b * x3) + sq * noise[k, i, 2]
    return out


def lorenz_euler_block_numba(states, noise, dt, s, r, b):
    states = np.ascontiguousarray(states, dtype=np.float64)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    return _lorenz_euler_block_jit(states, noise, dt, s, r, b)


# ---------------------------------------------------------------------------
# FitzHugh-Nagumo lattice Euler step
# ---------------------------------------------------------------------------


def fhn_euler_block_numpy(U, V, drive, noise, dt, coupling, cubic, beta, sig_sqdt):
    """One Euler step of the excitable lattice for a batch of particles.

    ``U``, ``V``, ``drive`` and ``noise`` all have shape (n, J, J).  ``drive``
    bundles forcing and stimulus contributions; ``cubic`` is (a3, a2, a1, a0)
    and ``beta`` is (b0, b1, b2).  Neighbour coupling uses the 4-neighbour
    lattice with truncation at edges; the accumulation order (up, down, left,
    right) matches the jit twin so results are bit-identical.
    """
    a3, a2, a1, a0 = cubic
    b0, b1, b2 = beta
    nb = np.zeros_like(U)
    nb[:, 1:, :] += U[:, :-1, :]
    nb[:, :-1, :] += U[:, 1:, :]
    nb[:, :, 1:] += U[:, :, :-1]
    nb[:, :, :-1] += U[:, :, 1:]
    p3 = ((a3 * U + a2) * U + a1) * U + a0
    u_new = U + dt * (p3 - V) + dt * (coupling * nb + drive) + sig_sqdt * noise
    v_new = V + dt * (b0 * U + b1 * V + b2)
    return u_new, v_new


@njit(cache=True)
def _fhn_euler_block_jit(U, V, drive, noise, dt, coupling,
                         a3, a2, a1, a0, b0, b1, b2, sig_sqdt):  # pragma: no cover
    n, J, _ = U.shape
    u_new = np.empty_like(U)
    v_new = np.empty_like(V)
    for p in range(n):
        for i in range(J):
            for j in range(J):
                u = U[p, i, j]
                v = V[p, i, j]
                nb = 0.0
                if i > 0:
                    nb += U[p, i - 1, j]
                if i < J - 1:
                    nb += U[p, i + 1, j]
                if j > 0:
                    nb += U[p, i, j - 1]
                if j < J - 1:
                    nb += U[p, i, j + 1]
                p3 = ((a3 * u + a2) * u + a1) * u + a0
                u_new[p, i, j] = (u + dt * (p3 - v)
                                  + dt * (coupling * nb + drive[p, i, j])
                                  + sig_sqdt * noise[p, i, j])
                v_new[p, i, j] = v + dt * (b0 * u + b1 * v + b2)
    return u_new, v_new


def fhn_euler_block_numba(U, V, drive, noise, dt, coupling, cubic, beta, sig_sqdt):
    a3, a2, a1, a0 = cubic
    b0, b1, b2 = beta
    return _fhn_euler_block_jit(
        np.ascontiguousarray(U), np.ascontiguousarray(V),
        np.ascontiguousarray(drive), np.ascontiguousarray(noise),
        dt, coupling, a3, a2, a1, a0, b0, b1, b2, sig_sqdt,
    )


# ---------------------------------------------------------------------------
# Resampling index merge
# ---------------------------------------------------------------------------


def resample_indices_numpy(cum_weights, u_sorted):
    """Ancestor indices for sorted uniforms against a weight CDF.

    Returns, for each u, the smallest k with ``cum_weights[k] >= u`` (clamped
    to the last index to absorb rounding in the final cumulative sum).
    """
    n = cum_weights.shape[0]
    idx = np.searchsorted(cum_weights, u_sorted, side="left")
    return np.minimum(idx, n - 1).astype(np.int64)


@njit(cache=True)
def _resample_indices_jit(cum_weights, u_sorted):  # pragma: no cover
    n = cum_weights.shape[0]
    m = u_sorted.shape[0]
    idx = np.empty(m, dtype=np.int64)
    k = 0
    for j in range(m):
        u = u_sorted[j]
        while k < n - 1 and cum_weights[k] < u:
            k += 1
        idx[j] = k
    return idx


def resample_indices_numba(cum_weights, u_sorted):
    return _resample_indices_jit(
        np.ascontiguousarray(cum_weights), np.ascontiguousarray(u_sorted)
    )


if NUMBA_ENABLED:
    lorenz_euler_block = lorenz_euler_block_numba
    fhn_euler_block = fhn_euler_block_numba
    resample_indices = resample_indices_numba
else:
    lorenz_euler_block = lorenz_euler_block_numpy
    fhn_euler_block = fhn_euler_block_numpy
    resample_indices = resample_indices_numpy


def backend_name() -> str:
    """Name of the active kernel backend ("numba" or "numpy")."""
    return "numba" if NUMBA_ENABLED else "numpy"
