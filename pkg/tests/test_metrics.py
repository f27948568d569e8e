import numpy as np
import pytest

from parpf.metrics import MetricRecord, bias_variance, empirical_mse, loglog_slope


class TestEmpiricalMse:
    def test_exact_match(self):
        est = np.arange(12.0).reshape(4, 3)
        assert empirical_mse(est, est) == 0.0

    def test_unit_offset(self):
        ref = np.zeros((5, 2))
        assert empirical_mse(ref + 1.0, ref) == 1.0

    def test_single_step_two_dims(self):
        assert empirical_mse(np.array([[1.0, 1.0]]), np.zeros((1, 2))) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            empirical_mse(np.zeros((3, 2)), np.zeros((4, 2)))


class TestBiasVariance:
    def test_exact_replicates(self):
        bias_sq, var = bias_variance(np.full(10, 3.0), 3.0)
        assert bias_sq == 0.0 and var == 0.0

    def test_symmetric_unbiased(self):
        bias_sq, var = bias_variance(np.array([-1.0, 1.0]), 0.0)
        assert bias_sq == 0.0
        assert var == 2.0

    def test_hand_case(self):
        bias_sq, var = bias_variance(np.array([0.0, 2.0]), 0.0)
        assert bias_sq == 1.0
        assert var == 2.0

    def test_needs_two(self):
        with pytest.raises(ValueError):
            bias_variance(np.array([1.0]), 0.0)

    def test_recombination(self):
        # bias^2 + var * (R-1)/R equals the mean squared deviation.
        rng = np.random.default_rng(5)
        for _ in range(10):
            reps = rng.normal(size=rng.integers(2, 50))
            ref = rng.normal()
            bias_sq, var = bias_variance(reps, ref)
            r = len(reps)
            msd = float(np.mean((reps - ref) ** 2))
            assert bias_sq + var * (r - 1) / r == pytest.approx(msd, rel=1e-12)


class TestLoglogSlope:
    def test_inverse_law(self):
        xs = np.array([1.0, 2.0, 4.0, 8.0])
        assert loglog_slope(xs, 3.0 / xs) == pytest.approx(-1.0, abs=1e-12)

    def test_constant(self):
        assert loglog_slope(np.array([1.0, 10.0, 100.0]), np.full(3, 2.5)) == pytest.approx(0.0, abs=1e-12)

    def test_inverse_square(self):
        xs = np.array([2.0, 5.0, 11.0, 31.0])
        assert loglog_slope(xs, 7.0 / xs**2) == pytest.approx(-2.0, abs=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(6)
        xs = np.exp(rng.normal(size=6))
        ys = np.exp(rng.normal(size=6))
        base = loglog_slope(xs, ys)
        assert loglog_slope(3.7 * xs, ys) == pytest.approx(base, rel=1e-9)
        assert loglog_slope(xs, 0.01 * ys) == pytest.approx(base, rel=1e-9)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            loglog_slope(np.array([1.0, -2.0]), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            loglog_slope(np.array([1.0]), np.array([1.0]))


class TestMetricRecord:
    def test_k_consistency(self):
        with pytest.raises(ValueError):
            MetricRecord("centralised-bf", 2, 10, 30, 1, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0)

    def test_row_round_trip(self):
        rec = MetricRecord("ensemble-bf", 8, 400, 3200, 50, 1.25e-3, 2.5e-7,
                           3.1e-5, 0.01, 0.5, 0.1275, 2)
        row = [str(v) for v in rec.to_row()]
        assert MetricRecord.from_row(row) == rec
