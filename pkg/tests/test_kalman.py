"""Tests for the per-block nonlinear Kalman decoding loop."""

import numpy as np
import pytest

from dqlcsim.channel import draw_channel
from dqlcsim.codec import DqlcParams
from dqlcsim.kalman import CarriedState, DecodeConfig, predict, run_block
from dqlcsim.optimizer import OptimizerConfig
from dqlcsim.source import CorrelationSpec, RealLayout, SourceModel, generate_block

OPT = OptimizerConfig(restarts=1, max_iters=80)
DEC = DecodeConfig()


def _setup(rng, n_users=2, rho=0.8, phi=0.0, eta_db=25.0):
    model = SourceModel.from_spec(n_users, CorrelationSpec("uniform", rho), phi)
    chan = draw_channel(n_users, 1.0, rng)
    budgets = np.full(n_users, 10 ** (eta_db / 10))
    return model, chan, budgets


class TestPredict:
    def test_zero_transition_resets_to_innovation(self):
        cov = np.array([[2.0, 0.3], [0.3, 1.0]])
        innov = np.array([[0.5, 0.0], [0.0, 0.5]])
        mean, out = predict(np.array([1.0, -1.0]), cov, 0.0, innov)
        np.testing.assert_array_equal(mean, [0.0, 0.0])
        np.testing.assert_array_equal(out, innov)

    def test_identity_transition_keeps_posterior(self):
        cov = np.array([[2.0, 0.3], [0.3, 1.0]])
        mean, out = predict(np.array([1.0, -1.0]), cov, 1.0, np.zeros((2, 2)))
        np.testing.assert_array_equal(mean, [1.0, -1.0])
        np.testing.assert_allclose(out, cov)

    def test_scalar_variance_recursion(self):
        phi = 0.99
        var = 0.3
        _, out = predict(np.zeros(1), np.array([[var]]), phi,
                         np.array([[1 - phi**2]]))
        assert out[0, 0] == pytest.approx(phi**2 * var + (1 - phi**2))

    def test_symmetrizes(self):
        skew = np.array([[1.0, 0.2], [0.1, 1.0]])
        _, out = predict(np.zeros(2), skew, 0.5, np.zeros((2, 2)))
        np.testing.assert_array_equal(out, out.T)


class TestRunBlock:
    def test_memoryless_equals_kf_when_phi_zero(self):
        rng = np.random.default_rng(0)
        model, chan, budgets = _setup(rng, phi=0.0)
        block = generate_block(model, 8, np.random.default_rng(1))
        est_a, _, _ = run_block(model, chan, block, 1,
                                np.random.default_rng(2), DEC, OPT,
                                budgets=budgets, use_prior=True)
        est_b, _, _ = run_block(model, chan, block, 1,
                                np.random.default_rng(2), DEC, OPT,
                                budgets=budgets, use_prior=False)
        np.testing.assert_array_equal(est_a, est_b)

    def test_noiseless_error_is_quantization_only(self):
        rng = np.random.default_rng(3)
        model, chan, budgets = _setup(rng, eta_db=25.0)
        from dqlcsim.channel import ChannelRealization
        chan0 = ChannelRealization(chan.gains, 1e-14)
        params = DqlcParams.from_user_values(2, 1, [5.0, 3.0], [0.6],
                                             budgets)
        block = generate_block(model, 10, np.random.default_rng(4))
        est, stats, _ = run_block(model, chan0, block, 1,
                                  np.random.default_rng(5), DEC, OPT,
                                  fixed_params=params, use_prior=False)
        err = est - block.symbols
        # uncoded user (index 1) is recovered exactly; quantized user's error
        # stays below the in-interval bound
        assert np.abs(err[:, 1]).max() < 1e-5
        assert np.abs(err[:, 0].real).max() <= params.delta[0]
        assert np.abs(err[:, 0].imag).max() <= params.delta[0]
        assert stats.fallbacks == 0

    def test_block_boundary_invariance(self):
        # one block of 8 equals two chained blocks of 4 (same noise stream)
        rng = np.random.default_rng(6)
        model, chan, budgets = _setup(rng, phi=0.9, rho=0.9)
        full = generate_block(model, 8, np.random.default_rng(7))
        est_full, _, _ = run_block(model, chan, full, 1,
                                   np.random.default_rng(8), DEC, OPT,
                                   budgets=budgets, use_prior=True)
        from dqlcsim.source import SourceBlock
        first = SourceBlock(full.symbols[:4])
        second = SourceBlock(full.symbols[4:])
        noise = np.random.default_rng(8)
        est1, _, state = run_block(model, chan, first, 1, noise, DEC, OPT,
                                   budgets=budgets, use_prior=True)
        est2, _, _ = run_block(model, chan, second, 1, noise, DEC, OPT,
                               budgets=budgets, use_prior=True, state=state)
        np.testing.assert_array_equal(est_full, np.vstack([est1, est2]))

    def test_posterior_stays_psd_and_bounded(self):
        rng = np.random.default_rng(9)
        model, chan, budgets = _setup(rng, n_users=3, rho=0.99, phi=0.99,
                                      eta_db=30.0)
        block = generate_block(model, 60, np.random.default_rng(10))
        layout = RealLayout(3, 2)
        init_trace = np.trace(layout.cov_to_real(model.spatial_cov))
        state = None
        noise = np.random.default_rng(11)
        from dqlcsim.source import SourceBlock
        traces = []
        for t in range(block.length):
            est, stats, state = run_block(model, chan,
                                          SourceBlock(block.symbols[t:t + 1]),
                                          2, noise, DEC, OPT, budgets=budgets,
                                          use_prior=True, state=state)
            assert np.all(np.isfinite(est))
            eig = np.linalg.eigvalsh(state.prior_cov)
            assert eig.min() >= -1e-10
            traces.append(np.trace(state.prior_cov))
        assert max(traces[10:]) <= 2.0 * init_trace

    def test_prior_improves_mse_with_temporal_correlation(self):
        rng = np.random.default_rng(12)
        mse_kf, mse_plain = 0.0, 0.0
        n_blocks = 30
        for b in range(n_blocks):
            model, chan, budgets = _setup(np.random.default_rng(100 + b),
                                          n_users=2, rho=0.95, phi=0.95,
                                          eta_db=30.0)
            block = generate_block(model, 10, np.random.default_rng(200 + b))
            _, st_kf, _ = run_block(model, chan, block, 1,
                                    np.random.default_rng(300 + b), DEC, OPT,
                                    budgets=budgets, use_prior=True)
            _, st_ml, _ = run_block(model, chan, block, 1,
                                    np.random.default_rng(300 + b), DEC, OPT,
                                    budgets=budgets, use_prior=False)
            mse_kf += st_kf.sq_error
            mse_plain += st_ml.sq_error
        assert mse_kf <= mse_plain

    def test_requires_budgets_without_fixed_params(self):
        rng = np.random.default_rng(13)
        model, chan, budgets = _setup(rng)
        block = generate_block(model, 2, rng)
        with pytest.raises(ValueError):
            run_block(model, chan, block, 1, rng, DEC, OPT)
