"""Ground-truth trajectory and observation generation."""

from __future__ import annotations

import numpy as np

from ..core import StateSpaceModel


def simulate(model: StateSpaceModel, n_steps: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Draw one state trajectory and its observation sequence.

    Returns ``(states, observations)`` with shapes ``(n_steps + 1, dim_x)``
    and ``(n_steps, dim_y)``; ``states[0]`` is the prior draw and
    ``observations[t - 1]`` is emitted by ``states[t]``.  Reproducible from
    the seed.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    rng = np.random.default_rng(seed)
    x = model.sample_prior(rng, 1)[0]
    states = np.empty((n_steps + 1, model.dim_x))
    observations = np.empty((n_steps, model.dim_y))
    states[0] = x
    for t in range(1, n_steps + 1):
        x = model.sample_transition(x[None, :], t, rng)[0]
        states[t] = x
        observations[t - 1] = np.asarray(model.sample_observation(x, t, rng)).reshape(-1)
    return states, observations
