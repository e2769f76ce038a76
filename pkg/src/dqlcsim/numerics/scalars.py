"""Scalar numerical kernels: Gaussian tail, chi-squared inverse CDF, Cholesky."""

import numpy as np
from scipy import special

from ..errors import DecompositionError, InvalidParameterError


def gaussian_tail(x):
    """Upper tail P(N(0,1) > x). Accepts scalars or arrays."""
    out = special.ndtr(-np.asarray(x, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


def chi2_inv_cdf(p: float, n: int) -> float:
    """x such that P(chi2_n < x) = p."""
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"p must be in (0,1), got {p}")
    if n < 1:
        raise InvalidParameterError(f"degrees of freedom must be >= 1, got {n}")
    return float(2.0 * special.gammaincinv(0.5 * n, p))


def cholesky_lower(m: np.ndarray) -> np.ndarray:
    """Lower-triangular L with m = L @ L.T; raises DecompositionError if not PD."""
    m = np.asarray(m, dtype=np.float64)
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError("matrix is not positive definite") from exc
