"""Block-fading multiple-access channel.

Channel magnitudes are Rayleigh draws sorted in descending order; phases are
dropped because the optimal per-user precoder cancels them, leaving positive
real effective channels. The real-equivalent channel matrix maps the 2K real
channel coordinates to the 2 real receive dimensions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .source import RealLayout


@dataclass(frozen=True)
class ChannelRealization:
    """Sorted positive channel gains plus the complex noise variance."""

    gains: np.ndarray  # (K,) strictly descending
    sigma_n2: float

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=np.float64)
        object.__setattr__(self, "gains", gains)
        if np.any(~np.isfinite(gains)) or np.any(gains <= 0):
            raise InvalidParameterError("channel gains must be positive and finite")
        if np.any(np.diff(gains) >= 0):
            raise InvalidParameterError("channel gains must be strictly descending")
        if self.sigma_n2 <= 0:
            raise InvalidParameterError("noise variance must be positive")

    @property
    def n_users(self) -> int:
        return len(self.gains)


def draw_channel(n_users: int, sigma_n2: float, rng: np.random.Generator) -> ChannelRealization:
    """Magnitudes of i.i.d. unit-variance complex Gaussians, sorted descending."""
    if n_users < 1:
        raise InvalidParameterError(f"need at least one user, got {n_users}")
    while True:
        z = rng.standard_normal((n_users, 2)) / np.sqrt(2.0)
        h = np.hypot(z[:, 0], z[:, 1])
        h[::-1].sort()
        if np.all(np.diff(h) < 0) and h[-1] > 0:
            return ChannelRealization(h, sigma_n2)


def real_channel_matrix(realization: ChannelRealization, layout: RealLayout) -> np.ndarray:
    """2 x 2K matrix H with y_real = H @ x_real for real channel gains.

    Row 0 collects the real parts, row 1 the imaginary parts; user k
    contributes gains[k] * I_2 on its (re, im) coordinate pair.
    """
    k = realization.n_users
    h = np.zeros((2, 2 * k))
    h[0, :k] = realization.gains
    h[1, k:] = realization.gains
    return h[:, layout.order]


def transmit(h_matrix: np.ndarray, x: np.ndarray, sigma_n2: float,
             rng: np.random.Generator) -> np.ndarray:
    """y = H x + n with n ~ N(0, (sigma_n2/2) I_2); sigma_n2 may be 0."""
    y = h_matrix @ np.asarray(x, dtype=np.float64)
    if sigma_n2 > 0.0:
        y = y + rng.standard_normal(2) * np.sqrt(0.5 * sigma_n2)
    return y
