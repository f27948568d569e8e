"""Lattice of stochastically forced FitzHugh-Nagumo nodes.

A J x J grid of excitable nodes, coupled through the 4-neighbour sum, driven
by a periodic pulse-train forcing on a masked node set and by rare random
stimuli applied behind travelling waves.  Per node the state is the voltage
U, the recovery variable V, and the on/off stimulus indicators of the last
``stim_hold`` steps, so a full network state is a flat vector of
``(2 + stim_hold) * J**2`` doubles laid out as
``[U, V, Q(t), Q(t-1), ..., Q(t-stim_hold+1)]``.

Voltage observations are collected on a grid of small zones with additive
Gaussian noise.

Notes on the default parameterisation
-------------------------------------
The cubic reaction term defaults to ``p3(u) = -u^3 + (18/5) u``.  The
positive-leading-coefficient mirror of this polynomial has no confining
branch: under the default stimulus amplitude the voltage escapes to
infinity in a few dozen Euler steps, and no node ever revisits the
``(u_minus, u_plus)`` band that defines the stimulation region.  The
negative leading coefficient gives the classical N-shaped nullcline with a
stable rest branch that recovering nodes traverse through exactly that
band.  The coefficients are a plain field, so either convention can be
requested explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import accel
from ..core import StateSpaceModel
from ..exceptions import NumericalDivergenceError


def von_neumann_neighbors(i: int, j: int, J: int) -> list[tuple[int, int]]:
    """Axis-adjacent lattice neighbours of (i, j), truncated at the border."""
    out = []
    if i > 0:
        out.append((i - 1, j))
    if i < J - 1:
        out.append((i + 1, j))
    if j > 0:
        out.append((i, j - 1))
    if j < J - 1:
        out.append((i, j + 1))
    return out


def fhn_stimulus_region(U: np.ndarray, u_minus: float = -1.8,
                        u_plus: float = -1.6) -> np.ndarray:
    """Boolean mask of nodes whose own or neighbouring voltage lies strictly
    inside (u_minus, u_plus).

    Accepts any (..., J, J) array; the mask is computed on the trailing two
    axes.
    """
    U = np.asarray(U)
    inside = (U > u_minus) & (U < u_plus)
    region = inside.copy()
    region[..., 1:, :] |= inside[..., :-1, :]
    region[..., :-1, :] |= inside[..., 1:, :]
    region[..., :, 1:] |= inside[..., :, :-1]
    region[..., :, :-1] |= inside[..., :, 1:]
    return region


def observation_zone_indices(J: int, n_zones: int = 5, zone_width: int = 2) -> np.ndarray:
    """Flat (row-major) indices of an n_zones x n_zones grid of square
    observation zones, zone_width nodes on a side, spread over the lattice."""
    if n_zones * zone_width > J:
        raise ValueError("observation zones do not fit on the lattice")
    if n_zones == 1:
        starts = [(J - zone_width) // 2]
    else:
        starts = [(k * (J - zone_width)) // (n_zones - 1) for k in range(n_zones)]
    rows = np.concatenate([np.arange(s, s + zone_width) for s in starts])
    idx = [(i * J + j) for i in rows for j in rows]
    return np.array(sorted(idx), dtype=np.intp)


@dataclass
class FhnNetworkModel(StateSpaceModel):
    J: int = 32
    dt: float = 5e-3
    coupling: float = 4.5e-3            # coefficient of the neighbour sum
    cubic: tuple = (-1.0, 0.0, 18.0 / 5.0, 0.0)   # (a3, a2, a1, a0)
    beta: tuple = (2.1, -0.6, 0.6)      # recovery dynamics (b0, b1, b2)
    u_minus: float = -1.8
    u_plus: float = -1.6
    stim_prob: float = 1e-3             # Bernoulli rate of a new stimulus
    stim_amp: float = 200.0
    stim_hold: int = 25                 # steps a stimulus stays applied
    forcing_amp: float = 200.0
    forcing_period: float = 20.0        # continuous-time units
    forcing_width: float = 1.0          # pulse width, continuous-time units
    forcing_mask: np.ndarray | None = None   # (J, J) 0/1; default: first column
    dyn_var: float = 0.5
    obs_var: float = 0.5
    n_zones: int = 5
    zone_width: int = 2

    def __post_init__(self):
        if self.u_minus >= self.u_plus:
            raise ValueError("u_minus must be below u_plus")
        if self.stim_hold < 1:
            raise ValueError("stim_hold must be >= 1")
        J = self.J
        if self.forcing_mask is None:
            mask = np.zeros((J, J))
            mask[:, 0] = 1.0
            self.forcing_mask = mask
        else:
            self.forcing_mask = np.asarray(self.forcing_mask, dtype=np.float64)
            if self.forcing_mask.shape != (J, J):
                raise ValueError("forcing_mask must be (J, J)")
        self.obs_indices = observation_zone_indices(J, self.n_zones, self.zone_width)
        self.dim_x = (2 + self.stim_hold) * J * J
        self.dim_y = self.obs_indices.shape[0]
        self._sig_sqdt = np.sqrt(self.dyn_var) * np.sqrt(self.dt)

    # -- state packing ------------------------------------------------------

    def unpack(self, x: np.ndarray):
        """Views (U, V, Q) of shape (n, J, J), (n, J, J), (n, hold, J, J)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n = x.shape[0]
        J2 = self.J * self.J
        U = x[:, :J2].reshape(n, self.J, self.J)
        V = x[:, J2:2 * J2].reshape(n, self.J, self.J)
        Q = x[:, 2 * J2:].reshape(n, self.stim_hold, self.J, self.J)
        return U, V, Q

    def pack(self, U: np.ndarray, V: np.ndarray, Q: np.ndarray) -> np.ndarray:
        n = U.shape[0]
        return np.concatenate(
            [U.reshape(n, -1), V.reshape(n, -1), Q.reshape(n, -1)], axis=1
        )

    # -- model hooks ---------------------------------------------------------

    def sample_prior(self, rng, n):
        # Quiescent start: all voltages and recovery variables at zero, no
        # stimulus history.
        return np.zeros((n, self.dim_x))

    def forcing_value(self, t: int) -> float:
        s = t * self.dt
        return self.forcing_amp if np.mod(s, self.forcing_period) <= self.forcing_width else 0.0

    def _advance(self, x_prev, t, rng=None):
        U, V, Q = self.unpack(x_prev)
        n = U.shape[0]
        q_new = np.zeros((n, self.J, self.J))

        if rng is not None:
            region = fhn_stimulus_region(U, self.u_minus, self.u_plus)
            fire = rng.random(n) < self.stim_prob
            u_sel = rng.random(n)
            counts = region.reshape(n, -1).sum(axis=1)
            for p in np.nonzero(fire & (counts > 0))[0]:
                flat = region[p].reshape(-1)
                rank = int(u_sel[p] * counts[p])
                cell = int(np.argmax(np.cumsum(flat) > rank))
                ci, cj = divmod(cell, self.J)
                q_new[p, ci, cj] = 1.0
                for ni, nj in von_neumann_neighbors(ci, cj, self.J):
                    q_new[p, ni, nj] = 1.0

        # Stimulus is on wherever any indicator fired in the last stim_hold
        # steps (the freshly drawn one included).
        q_recent = q_new + Q[:, : self.stim_hold - 1].sum(axis=1)
        psi = self.stim_amp * np.minimum(1.0, q_recent)
        drive = self.forcing_mask * self.forcing_value(t) + psi

        if rng is not None:
            noise = rng.standard_normal((n, self.J, self.J))
        else:
            noise = np.zeros((n, self.J, self.J))
        u_next, v_next = accel.fhn_euler_block(
            U, V, drive, noise, self.dt, self.coupling, self.cubic, self.beta,
            self._sig_sqdt,
        )
        if not (np.all(np.isfinite(u_next)) and np.all(np.isfinite(v_next))):
            raise NumericalDivergenceError("FH-N transition produced non-finite states")
        q_hist = np.concatenate([q_new[:, None], Q[:, : self.stim_hold - 1]], axis=1)
        return self.pack(u_next, v_next, q_hist)

    def sample_transition(self, x_prev, t, rng):
        return self._advance(x_prev, t, rng)

    def transition_point_prediction(self, x_prev, t):
        # Noise-free step with no new random stimulus; forcing and the
        # stimuli already latched in the history still apply.
        return self._advance(x_prev, t, rng=None)

    def log_likelihood(self, y, x, t):
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if y.shape[0] != self.dim_y:
            raise ValueError(f"expected {self.dim_y} observed nodes, got {y.shape[0]}")
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        J2 = self.J * self.J
        u_obs = x[:, :J2][:, self.obs_indices]
        resid = y - u_obs
        return -0.5 / self.obs_var * np.sum(resid * resid, axis=1)

    def sample_observation(self, x, t, rng):
        x = np.asarray(x).reshape(-1)
        u_obs = x[: self.J * self.J][self.obs_indices]
        return u_obs + np.sqrt(self.obs_var) * rng.standard_normal(self.dim_y)

    def error_projection(self, states):
        """Voltage block of states/estimates: errors are scored per node on U."""
        states = np.asarray(states)
        return states[..., : self.J * self.J]
