"""Tests for distortion and SDR accounting."""

import numpy as np
import pytest

from dqlcsim.errors import InvalidParameterError
from dqlcsim.metrics import average_mse, sdr_db


class TestAverageMse:
    def test_exact_estimates_give_zero(self):
        x = np.ones((4, 5, 3), dtype=complex)
        assert average_mse(x, x) == 0.0

    def test_single_element(self):
        assert average_mse(np.array([1.0 + 0j]), np.array([0.5 + 0j])) == \
            pytest.approx(0.25)

    def test_zero_estimator_of_unit_source(self):
        rng = np.random.default_rng(0)
        z = (rng.standard_normal(10**6) + 1j * rng.standard_normal(10**6)) / np.sqrt(2)
        assert average_mse(z, np.zeros_like(z)) == pytest.approx(1.0, rel=0.01)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            average_mse(np.zeros((2, 2)), np.zeros((2, 3)))


class TestSdrDb:
    @pytest.mark.parametrize("xi,want", [(1.0, 0.0), (0.01, 20.0),
                                         (0.5, 3.0102999566398)])
    def test_reference_values(self, xi, want):
        assert sdr_db(xi) == pytest.approx(want, abs=1e-9)

    def test_monotone_decreasing_in_distortion(self):
        xs = np.linspace(0.01, 2.0, 50)
        vals = [sdr_db(x) for x in xs]
        assert np.all(np.diff(vals) < 0)

    @pytest.mark.parametrize("xi", [0.0, -1.0])
    def test_rejects_nonpositive(self, xi):
        with pytest.raises(InvalidParameterError):
            sdr_db(xi)
