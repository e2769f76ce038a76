"""Tests for the correlated source model and the real-coordinate layout."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dqlcsim.errors import InvalidParameterError
from dqlcsim.source import (CorrelationSpec, RealLayout, SourceModel,
                            build_covariance, generate_block, to_real)


class TestBuildCovariance:
    def test_uniform_zero_rho_is_identity(self):
        cov = build_covariance(3, CorrelationSpec("uniform", 0.0))
        np.testing.assert_array_equal(cov, np.eye(3))

    def test_exponential_decay(self):
        cov = build_covariance(3, CorrelationSpec("exponential", 0.9))
        want = np.array([[1.0, 0.9, 0.81], [0.9, 1.0, 0.9], [0.81, 0.9, 1.0]])
        np.testing.assert_allclose(cov, want)

    def test_uniform_two_users(self):
        cov = build_covariance(2, CorrelationSpec("uniform", 0.95))
        np.testing.assert_allclose(cov, [[1.0, 0.95], [0.95, 1.0]])

    @pytest.mark.parametrize("rho", [-0.1, 1.0, 1.5])
    def test_rho_domain(self, rho):
        with pytest.raises(InvalidParameterError):
            CorrelationSpec("uniform", rho)

    @pytest.mark.parametrize("kind", ["uniform", "exponential"])
    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.9, 0.99, 0.999])
    def test_positive_definite(self, kind, rho):
        cov = build_covariance(5, CorrelationSpec(kind, rho))
        np.linalg.cholesky(cov)  # raises if not PD


class TestGenerateBlock:
    def test_stationary_covariance(self):
        spec = CorrelationSpec("uniform", 0.6)
        model = SourceModel.from_spec(3, spec, 0.0)
        rng = np.random.default_rng(0)
        block = generate_block(model, 100_000, rng)
        s = block.symbols
        emp = (s.conj().T @ s).real / len(s)
        err = np.linalg.norm(emp - model.spatial_cov) / np.linalg.norm(model.spatial_cov)
        assert err < 0.02

    def test_iid_when_phi_zero(self):
        model = SourceModel.from_spec(2, CorrelationSpec("uniform", 0.5), 0.0)
        block = generate_block(model, 100_000, np.random.default_rng(1))
        s = block.symbols
        lag1 = (s[:-1].conj().T @ s[1:]).real / (len(s) - 1)
        assert np.linalg.norm(lag1) < 0.01 * np.linalg.norm(model.spatial_cov)

    def test_lag_one_autocorrelation(self):
        model = SourceModel.from_spec(2, CorrelationSpec("uniform", 0.5), 0.99)
        block = generate_block(model, 100_000, np.random.default_rng(2))
        s = block.symbols
        for k in range(2):
            num = np.mean((s[1:, k] * s[:-1, k].conj()).real)
            den = np.mean(np.abs(s[:, k]) ** 2)
            assert num / den == pytest.approx(0.99, abs=0.01)

    def test_constant_in_degenerate_limit(self):
        # phi -> 1 sends the innovation variance to zero: state freezes
        model = SourceModel.from_spec(2, CorrelationSpec("uniform", 0.3), 0.9999999)
        block = generate_block(model, 50, np.random.default_rng(3))
        spread = np.abs(block.symbols - block.symbols[0]).max()
        assert spread < 1e-2

    def test_unit_variance_marginals(self):
        model = SourceModel.from_spec(3, CorrelationSpec("exponential", 0.9), 0.8)
        block = generate_block(model, 200_000, np.random.default_rng(4))
        var = np.mean(np.abs(block.symbols) ** 2, axis=0)
        np.testing.assert_allclose(var, 1.0, atol=0.02)


class TestToReal:
    def test_zero(self):
        np.testing.assert_array_equal(to_real(np.zeros(3, complex)), np.zeros(6))

    @given(arrays(np.float64, (8,), elements=st.floats(-100, 100)))
    @settings(max_examples=50, deadline=None)
    def test_isometry(self, parts):
        v = parts[:4] + 1j * parts[4:]
        assert np.linalg.norm(to_real(v)) == pytest.approx(np.linalg.norm(v),
                                                           rel=1e-12, abs=1e-12)

    def test_component_variance_half(self):
        rng = np.random.default_rng(5)
        z = (rng.standard_normal(10**6) + 1j * rng.standard_normal(10**6)) / np.sqrt(2)
        x = to_real(z)
        assert np.var(x) == pytest.approx(0.5, rel=0.01)


class TestRealLayout:
    def test_quantized_block_is_leading(self):
        layout = RealLayout(3, 2)
        v = np.array([1 + 10j, 2 + 20j, 3 + 30j])
        x = layout.to_real(v)
        # quantized users (0, 1): re parts then im parts, then uncoded user 2
        np.testing.assert_array_equal(x, [1, 2, 10, 20, 3, 30])

    def test_round_trip(self):
        layout = RealLayout(4, 2)
        rng = np.random.default_rng(6)
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        np.testing.assert_allclose(layout.to_complex(layout.to_real(v)), v)

    def test_expand_users(self):
        layout = RealLayout(3, 2)
        np.testing.assert_array_equal(layout.expand_users([5.0, 6.0, 7.0]),
                                      [5, 6, 5, 6, 7, 7])

    def test_cov_to_real_matches_sampling(self):
        spec = CorrelationSpec("uniform", 0.8)
        model = SourceModel.from_spec(3, spec, 0.0)
        layout = RealLayout(3, 1)
        want = layout.cov_to_real(model.spatial_cov)
        block = generate_block(model, 200_000, np.random.default_rng(7))
        x = np.stack([layout.to_real(row) for row in block.symbols])
        emp = x.T @ x / len(x)
        assert np.abs(emp - want).max() < 0.01

    def test_invalid_kq(self):
        with pytest.raises(InvalidParameterError):
            RealLayout(3, 3)
        with pytest.raises(InvalidParameterError):
            RealLayout(3, 0)
