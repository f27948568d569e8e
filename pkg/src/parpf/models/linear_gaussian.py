"""Linear-Gaussian state-space model and the exact Kalman filter oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import StateSpaceModel
from ..exceptions import NumericalDivergenceError


def _as_matrix(a) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    return a


@dataclass
class LinearGaussianModel(StateSpaceModel):
    """x_t = A x_{t-1} + w_t,  y_t = H x_t + v_t, all Gaussian.

    ``trans_cov`` and ``obs_cov`` must be positive definite.  The
    log-likelihood includes its normalising constant, so the filter's
    normalising-constant trace estimates the exact marginal likelihood.
    """

    A: np.ndarray
    trans_cov: np.ndarray
    H: np.ndarray
    obs_cov: np.ndarray
    prior_mean: np.ndarray
    prior_cov: np.ndarray
    _chol_q: np.ndarray = field(init=False, repr=False)
    _chol_r: np.ndarray = field(init=False, repr=False)
    _chol_p0: np.ndarray = field(init=False, repr=False)
    _obs_prec: np.ndarray = field(init=False, repr=False)
    _obs_logconst: float = field(init=False, repr=False)

    def __post_init__(self):
        self.A = _as_matrix(self.A)
        self.trans_cov = _as_matrix(self.trans_cov)
        self.H = _as_matrix(self.H)
        self.obs_cov = _as_matrix(self.obs_cov)
        self.prior_mean = np.atleast_1d(np.asarray(self.prior_mean, dtype=np.float64))
        self.prior_cov = _as_matrix(self.prior_cov)
        self.dim_x = self.A.shape[0]
        self.dim_y = self.H.shape[0]
        self._chol_q = np.linalg.cholesky(self.trans_cov)
        self._chol_p0 = np.linalg.cholesky(self.prior_cov)
        # A singular obs_cov (exact measurements) still supports Kalman
        # filtering; only sampling and likelihood evaluation need it PD.
        sign, logdet = np.linalg.slogdet(self.obs_cov)
        if sign > 0:
            self._chol_r = np.linalg.cholesky(self.obs_cov)
            self._obs_prec = np.linalg.inv(self.obs_cov)
            self._obs_logconst = -0.5 * (self.dim_y * np.log(2.0 * np.pi) + logdet)
        else:
            self._chol_r = None
            self._obs_prec = None
            self._obs_logconst = float("nan")

    @classmethod
    def scalar(cls, a: float = 1.0, q: float = 1.0, h: float = 1.0, r: float = 1.0,
               prior_mean: float = 0.0, prior_var: float = 1.0) -> "LinearGaussianModel":
        return cls(A=[[a]], trans_cov=[[q]], H=[[h]], obs_cov=[[r]],
                   prior_mean=[prior_mean], prior_cov=[[prior_var]])

    def sample_prior(self, rng, n):
        z = rng.standard_normal((n, self.dim_x))
        return self.prior_mean + z @ self._chol_p0.T

    def sample_transition(self, x_prev, t, rng):
        z = rng.standard_normal(x_prev.shape)
        return x_prev @ self.A.T + z @ self._chol_q.T

    def transition_point_prediction(self, x_prev, t):
        return x_prev @ self.A.T

    def log_likelihood(self, y, x, t):
        if self._obs_prec is None:
            raise ValueError("obs_cov is singular; likelihood is undefined")
        resid = np.atleast_1d(y) - x @ self.H.T
        quad = np.einsum("ni,ij,nj->n", resid, self._obs_prec, resid)
        return self._obs_logconst - 0.5 * quad

    def sample_observation(self, x, t, rng):
        if self._chol_r is None:
            return np.asarray(x) @ self.H.T
        z = rng.standard_normal(self.dim_y)
        return x @ self.H.T + z @ self._chol_r.T


def kalman_filter(model: LinearGaussianModel, observations) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact posteriors (mean, covariance): the prior, then one entry per
    observation."""
    observations = np.asarray(observations, dtype=np.float64)
    if observations.size == 0:
        observations = observations.reshape(0, model.dim_y)
    observations = np.atleast_2d(observations)
    if observations.ndim != 2 or observations.shape[1] != model.dim_y:
        raise ValueError("observations must have shape (T, dim_y)")
    mean = model.prior_mean.copy()
    cov = model.prior_cov.copy()
    out = [(mean.copy(), cov.copy())]
    eye = np.eye(model.dim_x)
    for y in observations:
        mean = model.A @ mean
        cov = model.A @ cov @ model.A.T + model.trans_cov
        innov = y - model.H @ mean
        s = model.H @ cov @ model.H.T + model.obs_cov
        try:
            gain = np.linalg.solve(s, model.H @ cov).T
        except np.linalg.LinAlgError as exc:
            raise NumericalDivergenceError(f"singular innovation covariance: {exc}") from exc
        mean = mean + gain @ innov
        cov = (eye - gain @ model.H) @ cov
        out.append((mean.copy(), cov.copy()))
    return out
