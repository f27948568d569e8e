"""Finite-state hidden Markov model with an exact forward-filter oracle.

States are the integers 0..K-1, carried by the generic particle machinery
as (n, 1) float arrays.  Observations are symbols 0..S-1 with an explicit
emission probability table, so likelihood values are exact (no dropped
constants) and the normalising-constant estimate of a particle filter can be
compared against the exact unnormalised measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import StateSpaceModel


@dataclass
class DiscreteHmm(StateSpaceModel):
    """prior: (K,) probabilities; transition: (K, K) row-stochastic;
    emission: (K, S) per-state symbol probabilities, all strictly positive.
    """

    prior: np.ndarray
    transition: np.ndarray
    emission: np.ndarray
    _cum_rows: np.ndarray = field(init=False, repr=False)
    _cum_prior: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.prior = np.asarray(self.prior, dtype=np.float64)
        self.transition = np.asarray(self.transition, dtype=np.float64)
        self.emission = np.asarray(self.emission, dtype=np.float64)
        k = self.prior.shape[0]
        if self.transition.shape != (k, k):
            raise ValueError("transition matrix shape mismatch")
        if not np.allclose(self.transition.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("transition rows must sum to 1")
        if not np.isclose(self.prior.sum(), 1.0, atol=1e-12):
            raise ValueError("prior must sum to 1")
        if self.emission.shape[0] != k:
            raise ValueError("emission table must have one row per state")
        if np.any(self.emission <= 0.0):
            raise ValueError("emission probabilities must be strictly positive")
        self.dim_x = 1
        self.dim_y = 1
        self._cum_rows = np.cumsum(self.transition, axis=1)
        self._cum_prior = np.cumsum(self.prior)

    @property
    def n_states(self) -> int:
        return self.prior.shape[0]

    def _states_of(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[:, 0].astype(np.intp)

    def sample_prior(self, rng, n):
        u = rng.random(n)
        states = np.searchsorted(self._cum_prior, u, side="right")
        states = np.minimum(states, self.n_states - 1)
        return states.astype(np.float64)[:, None]

    def sample_transition(self, x_prev, t, rng):
        states = self._states_of(x_prev)
        u = rng.random(states.shape[0])
        cum = self._cum_rows[states]
        nxt = (u[:, None] >= cum).sum(axis=1)
        nxt = np.minimum(nxt, self.n_states - 1)
        return nxt.astype(np.float64)[:, None]

    def log_likelihood(self, y, x, t):
        sym = int(np.asarray(y).reshape(-1)[0])
        return np.log(self.emission[self._states_of(x), sym])

    def sample_observation(self, x, t, rng):
        state = int(np.asarray(x).reshape(-1)[0])
        u = rng.random()
        sym = np.searchsorted(np.cumsum(self.emission[state]), u, side="right")
        return np.array([float(min(sym, self.emission.shape[1] - 1))])


def hmm_exact_filter(model: DiscreteHmm, observations) -> list[tuple[np.ndarray, float]]:
    """Exact forward recursion: per step, (filter vector, unnormalised mass).

    The unnormalised mass is the integral of the unnormalised filtering
    measure (the marginal likelihood of the observations so far).  The
    recursion is accumulated in extended precision to keep the mass exact to
    double rounding even over many steps.
    """
    obs = [int(np.asarray(y).reshape(-1)[0]) for y in observations]
    rho = model.prior.astype(np.longdouble)
    trans = model.transition.astype(np.longdouble)
    emit = model.emission.astype(np.longdouble)
    out = []
    for y in obs:
        rho = (trans.T @ rho) * emit[:, y]
        mass = rho.sum()
        out.append(((rho / mass).astype(np.float64), float(mass)))
    return out
