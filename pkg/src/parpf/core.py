"""Model abstraction, particle-system container and weight arithmetic.

All weight handling is done in the log domain: raw likelihood products over
a couple of hundred steps underflow double precision long before any filter
finishes, so the running normalising-constant estimate is stored as a sum of
per-step ``log(mean raw weight)`` increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import WeightCollapseError


class StateSpaceModel:
    """Behavioural interface for a discrete-time Markov state-space model.

    Concrete models bundle a prior sampler, a transition sampler, an
    observation log-likelihood and (optionally) a deterministic one-step
    point prediction used by the auxiliary filter's first stage.

    All hooks are vectorised over particles: states are ``(n, dim_x)``
    float64 arrays and each row is one sample.  ``log_likelihood`` may drop
    additive constants that depend only on ``(t, y)``; normalised weights are
    unaffected and the normalising-constant trace is then offset by a known
    per-step constant.

    Subclasses must be picklable (plain data, no open handles) so that
    filter runs can be dispatched to worker processes.
    """

    dim_x: int
    dim_y: int

    def sample_prior(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` i.i.d. initial states, shape (n, dim_x)."""
        raise NotImplementedError

    def sample_transition(self, x_prev: np.ndarray, t: int,
                          rng: np.random.Generator) -> np.ndarray:
        """Propagate each row of ``x_prev`` through the step-t transition."""
        raise NotImplementedError

    def log_likelihood(self, y: np.ndarray, x: np.ndarray, t: int) -> np.ndarray:
        """Observation log-density of ``y`` at each state row, shape (n,)."""
        raise NotImplementedError

    def transition_point_prediction(self, x_prev: np.ndarray, t: int) -> np.ndarray:
        """Deterministic transition summary (e.g. noise-free step).

        Optional; required only by the auxiliary filter.
        """
        raise NotImplementedError

    def has_point_prediction(self) -> bool:
        return type(self).transition_point_prediction is not StateSpaceModel.transition_point_prediction

    def sample_observation(self, x: np.ndarray, t: int,
                           rng: np.random.Generator) -> np.ndarray:
        """Draw one observation given state ``x`` (used by simulators)."""
        raise NotImplementedError

    def error_projection(self, states: np.ndarray) -> np.ndarray:
        """Components of a state (or estimate) entering error metrics.

        Defaults to the identity; high-dimensional models may restrict the
        comparison to the physically meaningful block.
        """
        return states


@dataclass
class ParticleApproximation:
    """N weighted particles plus the running log normalising constant.

    ``log_norm_const`` is the sum over processed steps of
    ``log(mean raw weight)``; exponentiating it recovers the standard
    unnormalised-measure estimate of the marginal data likelihood.
    ``collapsed`` flags that the weights of the most recent step underflowed
    and were reset to uniform (estimates at that step are invalid).
    """

    particles: np.ndarray
    weights: np.ndarray
    log_norm_const: float = 0.0
    t: int = 0
    collapsed: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.particles = np.asarray(self.particles, dtype=np.float64)
        if self.particles.ndim == 1:
            self.particles = self.particles[:, None]
        self.weights = np.asarray(self.weights, dtype=np.float64)
        n = self.particles.shape[0]
        if n < 1:
            raise ValueError("need at least one particle")
        if self.weights.shape != (n,):
            raise ValueError("weights shape does not match particle count")
        total = self.weights.sum()
        if not math.isclose(total, 1.0, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError(f"weights must sum to 1, got {total!r}")

    @property
    def n_particles(self) -> int:
        return self.particles.shape[0]


def uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def normalize_log_weights(log_w: np.ndarray) -> tuple[np.ndarray, float]:
    """Exponentiate-and-normalise log weights stably.

    Returns ``(weights, log_mean_raw)`` where ``weights`` sum to one and
    ``log_mean_raw = logsumexp(log_w) - log(n)`` is the step's increment of
    the log normalising constant.

    Raises :class:`WeightCollapseError` when every entry is ``-inf`` (total
    likelihood underflow); the caller decides the recovery policy.
    """
    log_w = np.asarray(log_w, dtype=np.float64)
    if log_w.ndim != 1 or log_w.shape[0] < 1:
        raise ValueError("log_w must be a non-empty 1-d array")
    m = np.max(log_w)
    if m == -np.inf:
        raise WeightCollapseError()
    if np.isnan(m):
        raise ValueError("log weights contain NaN")
    shifted = np.exp(log_w - m)
    total = shifted.sum()
    weights = shifted / total
    log_mean_raw = m + math.log(total) - math.log(log_w.shape[0])
    return weights, log_mean_raw


def estimate_integral(f, approx: ParticleApproximation):
    """Weighted particle estimate of an integral: sum_i w_i f(x_i).

    ``f`` maps the (n, dim_x) particle array to per-particle values of shape
    (n,) or (n, k).  Returns a float (or length-k vector) accordingly.
    """
    values = np.asarray(f(approx.particles), dtype=np.float64)
    if values.shape[0] != approx.n_particles:
        raise ValueError("f must return one value (or row) per particle")
    result = approx.weights @ values
    return float(result) if np.ndim(result) == 0 else result


def posterior_mean(approx: ParticleApproximation) -> np.ndarray:
    """Weighted mean of the particle cloud, shape (dim_x,)."""
    return approx.weights @ approx.particles
