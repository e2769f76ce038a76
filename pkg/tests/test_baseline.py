"""Tests for the uncoded linear scheme and its Kalman recursion."""

import numpy as np
import pytest

from dqlcsim.baseline import (LinearScheme, linear_encode, linear_kf_run,
                              linear_mmse_decode)
from dqlcsim.channel import ChannelRealization, draw_channel, real_channel_matrix
from dqlcsim.metrics import average_mse
from dqlcsim.source import CorrelationSpec, RealLayout, SourceModel, generate_block


class TestLinearEncode:
    def test_unit_gains_identity(self):
        s = np.array([0.1, -0.5, 2.0, 0.7])
        np.testing.assert_array_equal(linear_encode(s, np.ones(4)), s)

    def test_zero_source(self):
        np.testing.assert_array_equal(linear_encode(np.zeros(4), np.full(4, 3.0)),
                                      np.zeros(4))

    def test_power(self):
        rng = np.random.default_rng(0)
        s = rng.standard_normal((10**6,)) * np.sqrt(0.5)
        x = linear_encode(s, 2.0)
        assert np.mean(x**2) == pytest.approx(4.0 * 0.5, rel=0.01)


class TestLinearMmseDecode:
    def test_huge_noise_returns_prior(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((4, 4))
        prior = a @ a.T / 4 + np.eye(4)
        mean0 = rng.standard_normal(4)
        h = np.abs(rng.standard_normal((2, 4)))
        mean, cov = linear_mmse_decode(np.zeros(2), h, np.ones(4), mean0,
                                       prior, 1e14)
        np.testing.assert_allclose(mean, mean0, atol=1e-9)
        np.testing.assert_allclose(cov, prior, atol=1e-9)

    def test_noiseless_single_user_exact(self):
        # one complex user: 2 observations, 2 unknowns, invertible channel
        h = 2.0 * np.eye(2)
        s = np.array([0.7, -0.4])
        y = h @ (3.0 * s)
        mean, cov = linear_mmse_decode(y, h, np.full(2, 3.0), np.zeros(2),
                                       0.5 * np.eye(2), 1e-14)
        np.testing.assert_allclose(mean, s, atol=1e-6)
        assert np.all(np.diag(cov) < 1e-6)

    def test_matches_joint_gaussian_conditioning(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((4, 4))
        prior = a @ a.T / 4 + np.eye(4)
        mean0 = rng.standard_normal(4)
        gains = rng.uniform(0.5, 2.0, 4)
        h = np.abs(rng.standard_normal((2, 4)))
        y = rng.standard_normal(2)
        v = 0.3
        mean, cov = linear_mmse_decode(y, h, gains, mean0, prior, v)
        # brute force: stack (s, y) jointly and condition
        m = h * gains
        joint = np.zeros((6, 6))
        joint[:4, :4] = prior
        joint[:4, 4:] = prior @ m.T
        joint[4:, :4] = m @ prior
        joint[4:, 4:] = m @ prior @ m.T + v * np.eye(2)
        mu_y = m @ mean0
        want_mean = mean0 + joint[:4, 4:] @ np.linalg.solve(joint[4:, 4:], y - mu_y)
        want_cov = prior - joint[:4, 4:] @ np.linalg.solve(joint[4:, 4:],
                                                           joint[4:, :4])
        np.testing.assert_allclose(mean, want_mean, atol=1e-10)
        np.testing.assert_allclose(cov, want_cov, atol=1e-10)

    def test_posterior_never_exceeds_prior(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.standard_normal((4, 4))
            prior = a @ a.T / 4 + 0.5 * np.eye(4)
            h = np.abs(rng.standard_normal((2, 4)))
            _, cov = linear_mmse_decode(rng.standard_normal(2), h,
                                        rng.uniform(0.5, 2, 4),
                                        np.zeros(4), prior, 0.5)
            eig = np.linalg.eigvalsh(prior - cov)
            assert eig.min() >= -1e-10


class TestLinearKfRun:
    def test_memoryless_when_phi_zero(self):
        model = SourceModel.from_spec(2, CorrelationSpec("uniform", 0.8), 0.0)
        chan = draw_channel(2, 1.0, np.random.default_rng(4))
        block = generate_block(model, 10, np.random.default_rng(5))
        scheme = LinearScheme.full_power([100.0, 100.0])
        est_a, _, _ = linear_kf_run(model, chan, block, scheme,
                                    np.random.default_rng(6), use_prior=True)
        est_b, _, _ = linear_kf_run(model, chan, block, scheme,
                                    np.random.default_rng(6), use_prior=False)
        np.testing.assert_array_equal(est_a, est_b)

    def test_posterior_variance_monotone_under_repeats(self):
        # frozen state, repeated observations: uncertainty only shrinks
        model = SourceModel.from_spec(2, CorrelationSpec("uniform", 0.5),
                                      0.9999999)
        chan = draw_channel(2, 1.0, np.random.default_rng(7))
        scheme = LinearScheme.full_power([10.0, 10.0])
        layout = RealLayout(2, 1)
        h = real_channel_matrix(chan, layout)
        prior = layout.cov_to_real(model.spatial_cov)
        mean = np.zeros(4)
        traces = []
        rng = np.random.default_rng(8)
        gains = layout.expand_users(scheme.gains)
        for _ in range(20):
            y = rng.standard_normal(2)
            mean, prior = linear_mmse_decode(y, h, gains, mean, prior, 0.5)
            traces.append(np.trace(prior))
        assert np.all(np.diff(traces) <= 1e-12)

    def test_kf_beats_memoryless_at_low_snr_high_correlation(self):
        mse_kf, mse_ml = 0.0, 0.0
        for b in range(40):
            model = SourceModel.from_spec(3, CorrelationSpec("uniform", 0.99),
                                          0.99)
            chan = draw_channel(3, 1.0, np.random.default_rng(100 + b))
            block = generate_block(model, 20, np.random.default_rng(200 + b))
            scheme = LinearScheme.full_power(np.full(3, 10.0))  # eta = 10 dB
            est1, _, _ = linear_kf_run(model, chan, block, scheme,
                                       np.random.default_rng(300 + b),
                                       use_prior=True)
            est2, _, _ = linear_kf_run(model, chan, block, scheme,
                                       np.random.default_rng(300 + b),
                                       use_prior=False)
            mse_kf += average_mse(block.symbols, est1)
            mse_ml += average_mse(block.symbols, est2)
        assert mse_kf < mse_ml
