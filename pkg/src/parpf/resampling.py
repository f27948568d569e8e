"""Resampling kernels: weighted particle set in, unweighted set out."""

from __future__ import annotations

import numpy as np

from . import accel


def _check_weights(weights: np.ndarray) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.shape[0] < 1:
        raise ValueError("weights must be a non-empty 1-d array")
    if np.any(weights < 0.0):
        raise ValueError("weights must be non-negative")
    if abs(weights.sum() - 1.0) > 1e-8:
        raise ValueError("weights must be normalised to sum 1")
    return weights


def _sorted_uniforms(n: int, rng: np.random.Generator) -> np.ndarray:
    # Order statistics of n iid U(0,1) via normalised exponential spacings,
    # O(n) instead of sorting.
    e = rng.standard_exponential(n + 1)
    c = np.cumsum(e)
    return c[:n] / c[n]


def multinomial_resample_indices(weights: np.ndarray, n_out: int,
                                 rng: np.random.Generator) -> np.ndarray:
    """Draw ``n_out`` ancestor indices, index k with probability weights[k].

    Offspring counts are exactly multinomial(n_out, weights).  Uses the
    inverse-CDF merge against sorted uniforms, so cost is O(N + n_out) and
    the returned indices are in non-decreasing order; particle sets are
    exchangeable, so callers that need i.i.d.-ordered slots should permute.
    """
    weights = _check_weights(weights)
    if n_out < 1:
        raise ValueError("n_out must be >= 1")
    cum = np.cumsum(weights)
    u = _sorted_uniforms(n_out, rng)
    return accel.resample_indices(cum, u)


def multinomial_resample(particles: np.ndarray, weights: np.ndarray, n_out: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Multinomial resampling of a weighted particle array."""
    idx = multinomial_resample_indices(weights, n_out, rng)
    return np.asarray(particles)[idx]


def systematic_resample_indices(weights: np.ndarray, n_out: int,
                                rng: np.random.Generator) -> np.ndarray:
    """Systematic resampling: one shared uniform, evenly spaced thresholds.

    Lower-variance alternative to multinomial resampling.  Note that the
    convergence and unbiasedness properties exercised by the verification
    suite are stated for the multinomial kernel; this one is an opt-in.
    """
    weights = _check_weights(weights)
    if n_out < 1:
        raise ValueError("n_out must be >= 1")
    cum = np.cumsum(weights)
    u = (np.arange(n_out) + rng.random()) / n_out
    return accel.resample_indices(cum, u)


def systematic_resample(particles: np.ndarray, weights: np.ndarray, n_out: int,
                        rng: np.random.Generator) -> np.ndarray:
    idx = systematic_resample_indices(weights, n_out, rng)
    return np.asarray(particles)[idx]
