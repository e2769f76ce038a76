"""Distortion and signal-to-distortion-ratio accounting."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


def average_mse(truth: np.ndarray, estimates: np.ndarray) -> float:
    """Mean |s - s_hat|^2 over all complex symbols (any matching shape)."""
    truth = np.asarray(truth)
    estimates = np.asarray(estimates)
    if truth.shape != estimates.shape:
        raise InvalidParameterError(
            f"shape mismatch: {truth.shape} vs {estimates.shape}")
    return float(np.mean(np.abs(truth - estimates) ** 2))


def sdr_db(xi: float) -> float:
    """10 log10(1/xi)."""
    if xi <= 0:
        raise InvalidParameterError(f"mean distortion must be positive, got {xi}")
    return float(-10.0 * np.log10(xi))


@dataclass(frozen=True)
class SdrRecord:
    """One experiment row: a (scheme, grid point) outcome."""

    scheme: str
    n_users: int
    n_quantized: int
    rho: float
    phi: float
    eta_db: float
    xi: float
    sdr_db: float
    avg_candidates: float
    fallback_rate: float
    wallclock_s: float
    seed: int
