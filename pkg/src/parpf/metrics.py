"""Error and scaling-law estimators."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np


@dataclass
class MetricRecord:
    """One aggregated row of a benchmark sweep."""

    variant: str
    n_filters: int
    n_particles: int
    total_particles: int
    replicates: int
    mse_mean: float
    mse_var: float
    bias_sq: float
    wall_per_step_s: float
    wall_total_s: float
    time_error_index: float
    collapse_count: int

    CSV_HEADER = ("variant", "M", "N", "K", "reps", "mse_mean", "mse_var",
                  "bias_sq", "wall_per_step_s", "wall_total_s",
                  "time_error_index", "collapse_count")

    def __post_init__(self):
        if self.total_particles != self.n_filters * self.n_particles:
            raise ValueError("total particle count must equal M * N")

    def to_row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]

    @classmethod
    def from_row(cls, row) -> "MetricRecord":
        variant, m, n, k, reps = row[0], int(row[1]), int(row[2]), int(row[3]), int(row[4])
        floats = [float(v) for v in row[5:11]]
        return cls(variant, m, n, k, reps, *floats, collapse_count=int(row[11]))


def empirical_mse(estimates, reference) -> float:
    """Mean squared error over time steps and state components.

    Averaging over components makes this a per-component (for lattice models:
    per-node) convention.
    """
    estimates = np.asarray(estimates, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if estimates.shape != reference.shape:
        raise ValueError("estimates and reference must have equal shapes")
    diff = estimates - reference
    return float(np.mean(diff * diff))


def bias_variance(replicates, reference: float) -> tuple[float, float]:
    """Squared bias and unbiased sample variance of replicated estimates."""
    replicates = np.asarray(replicates, dtype=np.float64)
    if replicates.ndim != 1 or replicates.shape[0] < 2:
        raise ValueError("need at least two replicates")
    mean = replicates.mean()
    bias_sq = (mean - reference) ** 2
    variance = replicates.var(ddof=1)
    return float(bias_sq), float(variance)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.shape[0] < 2:
        raise ValueError("need two equally long vectors of at least 2 points")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("log-log fit needs strictly positive values")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)
