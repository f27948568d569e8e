"""Stochastic Lorenz 63 model, partially observed through its first coordinate.

The continuous-time system with additive Wiener noise is discretised by
Euler steps of length ``dt``; one filtering step spans ``substeps``
discrete steps, after which the first coordinate is observed with additive
Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import accel
from ..core import StateSpaceModel
from ..exceptions import NumericalDivergenceError

LORENZ_PRIOR_MEAN = (-10.2410, -1.3984, -23.6752)


@dataclass
class Lorenz63Model(StateSpaceModel):
    s: float = 10.0
    r: float = 28.0
    b: float = 8.0 / 3.0
    dt: float = 1e-3
    substeps: int = 100
    obs_var: float = 0.5
    prior_mean: tuple = LORENZ_PRIOR_MEAN
    prior_var: float = 10.0

    def __post_init__(self):
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.obs_var <= 0 or self.prior_var <= 0:
            raise ValueError("variances must be positive")
        self.dim_x = 3
        self.dim_y = 1
        self._prior_mean_arr = np.asarray(self.prior_mean, dtype=np.float64)

    def sample_prior(self, rng, n):
        z = rng.standard_normal((n, 3))
        return self._prior_mean_arr + np.sqrt(self.prior_var) * z

    def _propagate(self, x_prev, noise):
        out = accel.lorenz_euler_block(x_prev, noise, self.dt, self.s, self.r, self.b)
        if not np.all(np.isfinite(out)):
            raise NumericalDivergenceError("Lorenz transition produced non-finite states")
        return out

    def sample_transition(self, x_prev, t, rng):
        x_prev = np.atleast_2d(np.asarray(x_prev, dtype=np.float64))
        noise = rng.standard_normal((self.substeps, x_prev.shape[0], 3))
        return self._propagate(x_prev, noise)

    def transition_point_prediction(self, x_prev, t):
        x_prev = np.atleast_2d(np.asarray(x_prev, dtype=np.float64))
        noise = np.zeros((self.substeps, x_prev.shape[0], 3))
        return self._propagate(x_prev, noise)

    def log_likelihood(self, y, x, t):
        # -(y - x1)^2 / (2 * obs_var); the additive constant is dropped.
        resid = float(np.asarray(y).reshape(-1)[0]) - np.asarray(x)[:, 0]
        return -(resid * resid) / (2.0 * self.obs_var)

    def sample_observation(self, x, t, rng):
        x = np.asarray(x).reshape(-1)
        return np.array([x[0] + np.sqrt(self.obs_var) * rng.standard_normal()])


def lorenz_transition(x: np.ndarray, rng: np.random.Generator,
                      model: Lorenz63Model | None = None) -> np.ndarray:
    """One observation interval (``substeps`` noisy Euler steps) for a single
    3-vector state."""
    model = model or Lorenz63Model()
    out = model.sample_transition(np.asarray(x, dtype=np.float64)[None, :], 1, rng)
    return out[0]


def lorenz_log_likelihood(y: float, x: np.ndarray,
                          model: Lorenz63Model | None = None) -> float:
    """Scalar-observation log-likelihood of a single state (constant dropped)."""
    model = model or Lorenz63Model()
    return float(model.log_likelihood(np.array([y]), np.asarray(x)[None, :], 1)[0])
