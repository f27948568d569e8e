"""Ensembles of fully independent filters and the time-error index.

``run_ensemble`` runs M filters that never communicate: each one draws its
randomness from its own child of the master seed (``SeedSequence.spawn``,
whose stream derivation is documented and stable across numpy versions), so
results are bit-identical whatever the worker count or scheduling.  The only
aggregation is an arithmetic average of the per-filter estimator vectors,
taken in fixed filter order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .core import StateSpaceModel
from .filters import FilterOutput, run_filter

CENTRALISED = "centralised"
ENSEMBLE = "ensemble"


@dataclass
class EnsembleOutput:
    """M independent filter records plus their averaged estimators."""

    variant: str
    n_filters: int
    n_particles: int
    master_seed: object
    filter_outputs: list[FilterOutput]
    mean_estimates: np.ndarray
    filter_seconds: np.ndarray
    total_seconds: float

    @property
    def n_steps(self) -> int:
        return self.mean_estimates.shape[0]

    def same_result(self, other: "EnsembleOutput") -> bool:
        """Bitwise equality of all non-timing content."""
        return (
            self.variant == other.variant
            and self.n_filters == other.n_filters
            and self.n_particles == other.n_particles
            and np.array_equal(self.mean_estimates, other.mean_estimates)
            and all(a.same_result(b) for a, b in
                    zip(self.filter_outputs, other.filter_outputs))
        )


def filter_seeds(master_seed, n_filters: int) -> list[np.random.SeedSequence]:
    """Per-filter seed sequences: children ``spawn(n_filters)`` of the master."""
    ss = (master_seed if isinstance(master_seed, np.random.SeedSequence)
          else np.random.SeedSequence(master_seed))
    return ss.spawn(n_filters)


def _filter_task(args):
    model, observations, variant, n_particles, seed, index = args
    return index, run_filter(model, observations, variant, n_particles, seed)


def average_estimates(filter_outputs: list[FilterOutput]) -> np.ndarray:
    """Arithmetic mean of per-filter estimates, fixed left-to-right order."""
    acc = filter_outputs[0].estimates.copy()
    for out in filter_outputs[1:]:
        acc += out.estimates
    return acc / float(len(filter_outputs))


def run_ensemble(model: StateSpaceModel, observations, variant: str,
                 n_filters: int, n_particles: int, master_seed,
                 workers: int = 1) -> EnsembleOutput:
    """Run ``n_filters`` independent filters and average their estimators.

    ``workers`` > 1 dispatches the filters to a process pool; it affects wall
    time only, never the result.  A filter whose weights collapse stays in
    the average (its collapse steps are recorded on its own output): with no
    interaction between filters, none of them may be dropped based on
    another's outcome.
    """
    if n_filters < 1 or n_particles < 1:
        raise ValueError("n_filters and n_particles must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    seeds = filter_seeds(master_seed, n_filters)
    tasks = [(model, observations, variant, n_particles, seeds[m], m)
             for m in range(n_filters)]
    started = time.perf_counter()
    results: list[FilterOutput | None] = [None] * n_filters
    if workers == 1 or n_filters == 1:
        for task in tasks:
            index, out = _filter_task(task)
            results[index] = out
    else:
        ctx = get_context("fork")
        with ProcessPoolExecutor(max_workers=min(workers, n_filters),
                                 mp_context=ctx) as pool:
            for index, out in pool.map(_filter_task, tasks):
                results[index] = out
    total = time.perf_counter() - started
    outputs = [out for out in results if out is not None]
    mean_estimates = average_estimates(outputs)
    filter_seconds = np.array([out.total_seconds for out in outputs])
    return EnsembleOutput(variant, n_filters, n_particles, master_seed,
                          outputs, mean_estimates, filter_seconds, total)


def ensemble_estimate(out: EnsembleOutput, t: int) -> np.ndarray:
    """Averaged estimator vector at step index ``t`` (0-based)."""
    if not 0 <= t < out.n_steps:
        raise ValueError(f"step index {t} outside 0..{out.n_steps - 1}")
    return out.mean_estimates[t]


def time_error_index(variant: str, n_filters: int, n_particles: int) -> float:
    """Product of asymptotic running-time and MSE orders.

    A centralised filter with K particles runs in O(K) with MSE O(1/K), so
    its index is 1 regardless of K.  An ensemble of M independent filters
    with N particles each runs in O(N) with MSE O(1/MN + 1/N^2), giving
    1/M + 1/N; smaller is asymptotically more efficient.
    """
    if n_filters < 1 or n_particles < 1:
        raise ValueError("n_filters and n_particles must be >= 1")
    if variant == CENTRALISED:
        return 1.0
    if variant == ENSEMBLE:
        return 1.0 / n_filters + 1.0 / n_particles
    raise ValueError(f"unknown variant {variant!r}")
