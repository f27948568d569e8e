#!/usr/bin/env python3
"""Timing comparison of the jit-compiled hot kernels vs their numpy twins.

Runs each kernel pair on representative problem sizes, checks that the two
paths agree bit for bit, and prints the speedup.  The same fallback path is
what ``PARPF_NUMBA=0`` selects at import time.

Usage: python3 benchmarks/kernel_bench.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from parpf import accel


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lorenz(repeats):
    rng = np.random.default_rng(1)
    rows = []
    for n in (1000, 10_000):
        states = rng.normal(size=(n, 3))
        noise = rng.normal(size=(100, n, 3))
        args = (states, noise, 1e-3, 10.0, 28.0, 8.0 / 3.0)
        jit = accel.lorenz_euler_block_numba(*args)
        ref = accel.lorenz_euler_block_numpy(*args)
        assert np.array_equal(jit, ref), "lorenz kernel paths disagree"
        t_jit = _best_of(lambda: accel.lorenz_euler_block_numba(*args), repeats)
        t_np = _best_of(lambda: accel.lorenz_euler_block_numpy(*args), repeats)
        rows.append((f"lorenz_euler_block n={n} (100 substeps)", t_jit, t_np))
    return rows


def bench_fhn(repeats):
    rng = np.random.default_rng(2)
    rows = []
    for n, grid in ((500, 16), (100, 32)):
        shape = (n, grid, grid)
        U, V, drive, noise = (rng.normal(size=shape) for _ in range(4))
        cubic = (-1.0, 0.0, 3.6, 0.0)
        beta = (2.1, -0.6, 0.6)
        args = (U, V, drive, noise, 5e-3, 4.5e-3, cubic, beta, 0.05)
        u1, v1 = accel.fhn_euler_block_numba(*args)
        u2, v2 = accel.fhn_euler_block_numpy(*args)
        assert np.array_equal(u1, u2) and np.array_equal(v1, v2), \
            "fhn kernel paths disagree"
        t_jit = _best_of(lambda: accel.fhn_euler_block_numba(*args), repeats)
        t_np = _best_of(lambda: accel.fhn_euler_block_numpy(*args), repeats)
        rows.append((f"fhn_euler_block n={n} J={grid}", t_jit, t_np))
    return rows


def bench_resample(repeats):
    rng = np.random.default_rng(3)
    rows = []
    for n in (1000, 100_000):
        w = rng.dirichlet(np.ones(n))
        cum = np.cumsum(w)
        e = rng.standard_exponential(n + 1)
        c = np.cumsum(e)
        u = c[:n] / c[n]
        assert np.array_equal(accel.resample_indices_numba(cum, u),
                              accel.resample_indices_numpy(cum, u)), \
            "resample kernel paths disagree"
        t_jit = _best_of(lambda: accel.resample_indices_numba(cum, u), repeats)
        t_np = _best_of(lambda: accel.resample_indices_numpy(cum, u), repeats)
        rows.append((f"resample_indices n={n}", t_jit, t_np))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not accel.NUMBA_ENABLED:
        raise SystemExit("numba backend is disabled (PARPF_NUMBA=0?); "
                         "nothing to compare")

    rows = []
    rows += bench_lorenz(args.repeats)
    rows += bench_fhn(args.repeats)
    rows += bench_resample(args.repeats)

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>9}  {'numpy':>9}  {'speedup':>7}")
    for name, t_jit, t_np in rows:
        print(f"{name:<{width}}  {t_jit * 1e3:8.2f}ms  {t_np * 1e3:8.2f}ms  "
              f"{t_np / t_jit:6.2f}x")
    print("\nall kernel pairs agree bit-for-bit")


if __name__ == "__main__":
    main()
