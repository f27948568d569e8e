import numpy as np
import pytest

from parpf.exceptions import NumericalDivergenceError
from parpf.models import Lorenz63Model, lorenz_log_likelihood, lorenz_transition, simulate
from parpf.models.lorenz63 import LORENZ_PRIOR_MEAN


class TestDeterministicStep:
    def test_origin_is_fixed_point(self):
        model = Lorenz63Model()
        out = model.transition_point_prediction(np.zeros((1, 3)), 1)
        np.testing.assert_array_equal(out, np.zeros((1, 3)))

    def test_single_substep_hand_value(self):
        # One Euler substep from (1,1,1) with dt=1e-3, (s,r,b)=(10,28,8/3):
        # x1' = 1, x2' = 1 + 1e-3*(28-1-1) = 1.026,
        # x3' = 1 + 1e-3*(1-8/3) = 0.998333...
        model = Lorenz63Model(substeps=1)
        out = model.transition_point_prediction(np.array([[1.0, 1.0, 1.0]]), 1)
        np.testing.assert_allclose(out[0], [1.0, 1.026, 1.0 - 5.0 / 3.0 * 1e-3],
                                   rtol=1e-14)

    def test_default_parameters(self):
        model = Lorenz63Model()
        assert (model.s, model.r, model.b) == (10.0, 28.0, 8.0 / 3.0)
        assert model.dt == 1e-3
        assert model.substeps == 100
        assert model.obs_var == 0.5
        assert model.prior_var == 10.0
        np.testing.assert_allclose(model.prior_mean, LORENZ_PRIOR_MEAN)


class TestStochasticTransition:
    def test_reproducible(self):
        model = Lorenz63Model()
        x = np.tile(np.array(LORENZ_PRIOR_MEAN), (5, 1))
        a = model.sample_transition(x, 1, np.random.default_rng(9))
        b = model.sample_transition(x, 1, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_single_state_wrapper(self):
        out = lorenz_transition(np.array(LORENZ_PRIOR_MEAN), np.random.default_rng(3))
        assert out.shape == (3,)
        assert np.all(np.isfinite(out))

    def test_divergence_detected(self):
        model = Lorenz63Model()
        with pytest.raises(NumericalDivergenceError):
            model.sample_transition(np.full((1, 3), 1e200), 1,
                                    np.random.default_rng(0))

    def test_noise_scale(self):
        # Over one substep the added noise has variance dt per coordinate.
        model = Lorenz63Model(substeps=1)
        x = np.zeros((200_000, 3))
        out = model.sample_transition(x, 1, np.random.default_rng(17))
        np.testing.assert_allclose(out.var(axis=0), model.dt, rtol=0.02)


class TestLikelihoodAndPrior:
    def test_mode_is_zero(self):
        assert lorenz_log_likelihood(2.5, np.array([2.5, 0.0, 0.0])) == 0.0

    def test_unit_residual(self):
        assert lorenz_log_likelihood(1.0, np.array([0.0, 5.0, 5.0])) == -1.0

    def test_prior_moments(self):
        model = Lorenz63Model()
        n = 4000
        draws = model.sample_prior(np.random.default_rng(5), n)
        tol = 3.0 * np.sqrt(model.prior_var / n)
        assert np.all(np.abs(draws.mean(axis=0) - model.prior_mean) < tol)


class TestSimulation:
    def test_observation_count_and_shape(self):
        model = Lorenz63Model()
        states, obs = simulate(model, 200, 11)
        assert states.shape == (201, 3)
        assert obs.shape == (200, 1)
        assert np.all(np.isfinite(states))

    def test_observations_track_first_coordinate(self):
        model = Lorenz63Model()
        states, obs = simulate(model, 100, 2)
        resid = obs[:, 0] - states[1:, 0]
        # residuals are N(0, 0.5) draws
        assert abs(resid.mean()) < 3.0 * np.sqrt(0.5 / 100)
        assert 0.3 < resid.var() < 0.75
