"""Shared numerical kernels: Gaussian tail, chi-squared quantiles, Cholesky,
and truncated multivariate Gaussian moments over axis-aligned boxes."""

from ._backend import backend_name, kernels
from .moments import Box, BoxMomentEngine, TruncatedMoments, truncated_1d, truncated_moments
from .scalars import chi2_inv_cdf, cholesky_lower, gaussian_tail

__all__ = [
    "Box",
    "BoxMomentEngine",
    "TruncatedMoments",
    "backend_name",
    "chi2_inv_cdf",
    "cholesky_lower",
    "gaussian_tail",
    "kernels",
    "truncated_1d",
    "truncated_moments",
]
