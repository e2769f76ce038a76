"""Distributed quantizer-linear mapping.

The leading 2*K_q real coordinates carry scaled quantization offsets
alpha_k*(l_k + 1/2) with l_k indexing the step-Delta_k interval containing
the source coordinate; the remaining coordinates are plain scalings
alpha_k*s_k. Power accounting is per user (one complex symbol = two real
coordinates), so the quantized-symbol power factor Gamma below is the mean
power of a unit-gain quantized complex symbol and the per-user constraint
reads alpha_k <= sqrt(T_k / Gamma(Delta_k)).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import InvalidParameterError
from .source import RealLayout

# Per-real-component variance of a unit-variance complex source symbol.
SIGMA_S2 = 0.5


def quantizer_index(s, delta):
    """Index l of the half-open interval [delta*l, delta*(l+1)) containing s."""
    if np.any(np.asarray(delta) <= 0):
        raise InvalidParameterError("quantizer step must be positive")
    return np.floor(np.asarray(s, dtype=np.float64) / delta).astype(np.int64)


def _tail_cut(sigma: float, delta: float, tail_eps: float) -> int:
    # Two extra sigmas past the eps-quantile keep the discarded weighted
    # remainder below ~1e-12 even for small delta.
    z = -ndtri(tail_eps) + 2.0
    return int(np.ceil(z * sigma / delta)) + 1


def gamma_power(delta: float, sigma_s2: float = SIGMA_S2, tail_eps: float = 1e-12) -> float:
    """Mean transmit power of a unit-gain quantized complex symbol.

    Both real components are N(0, sigma_s2) and quantize independently, so
    this is 4 * sum_{l>=0} (l+1/2)^2 * P(s in [delta*l, delta*(l+1)]).
    Tends to 1/2 as delta -> inf and to 2*sigma_s2/delta^2 as delta -> 0.
    """
    if delta <= 0:
        raise InvalidParameterError(f"delta must be positive, got {delta}")
    if sigma_s2 <= 0:
        raise InvalidParameterError(f"sigma_s2 must be positive, got {sigma_s2}")
    sigma = np.sqrt(sigma_s2)
    lmax = _tail_cut(sigma, delta, tail_eps)
    edges = delta * np.arange(lmax + 1) / sigma
    mass = ndtr(-edges[:-1]) - ndtr(-edges[1:])  # upper-tail differences
    centers = np.arange(lmax) + 0.5
    return float(4.0 * np.sum(centers**2 * mass))


@dataclass(frozen=True)
class DqlcParams:
    """Per-coordinate encoder parameters under the fixed real layout.

    alpha has one gain per real coordinate (2K entries, each user's value
    duplicated across its real/imag pair); delta covers the 2*K_q quantized
    coordinates. budgets holds the per-user power limits T_k.
    """

    n_users: int
    n_quantized: int
    alpha: np.ndarray
    delta: np.ndarray
    sigma_s2: float
    budgets: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        delta = np.asarray(self.delta, dtype=np.float64)
        budgets = np.asarray(self.budgets, dtype=np.float64)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "budgets", budgets)
        k, kq = self.n_users, self.n_quantized
        if not 1 <= kq <= k - 1:
            raise InvalidParameterError(f"need 1 <= K_q <= K-1, got K_q={kq}, K={k}")
        if alpha.shape != (2 * k,) or delta.shape != (2 * kq,):
            raise InvalidParameterError("alpha/delta shape mismatch with K, K_q")
        if budgets.shape != (k,):
            raise InvalidParameterError("budgets must hold one power limit per user")
        if np.any(alpha <= 0) or np.any(delta <= 0):
            raise InvalidParameterError("alpha and delta must be strictly positive")
        layout = RealLayout(k, kq)
        budget_coords = layout.expand_users(budgets)
        slack = 1.0 + 1e-9  # tolerate round-off at the constraint boundary
        for i in range(2 * kq):
            cap = np.sqrt(budget_coords[i] / gamma_power(delta[i], self.sigma_s2))
            if alpha[i] > cap * slack:
                raise InvalidParameterError(
                    f"quantized gain alpha[{i}]={alpha[i]:.4g} exceeds power cap {cap:.4g}")
        uncoded_cap = np.sqrt(budget_coords[2 * kq:] / (2.0 * self.sigma_s2))
        if np.any(alpha[2 * kq:] > uncoded_cap * slack):
            raise InvalidParameterError("uncoded gain exceeds power cap")

    @property
    def n_quantized_real(self) -> int:
        return 2 * self.n_quantized

    @classmethod
    def from_user_values(cls, n_users, n_quantized, alpha_users, delta_users,
                         budgets, sigma_s2=SIGMA_S2) -> "DqlcParams":
        """Build from one gain per user and one step per quantized user."""
        layout = RealLayout(n_users, n_quantized)
        alpha = layout.expand_users(np.asarray(alpha_users, dtype=np.float64))
        delta = np.tile(np.asarray(delta_users, dtype=np.float64), 2)
        return cls(n_users, n_quantized, alpha, delta, sigma_s2,
                   np.asarray(budgets, dtype=np.float64))

    def to_dict(self) -> dict:
        return {
            "n_users": self.n_users,
            "n_quantized": self.n_quantized,
            "alpha": self.alpha.tolist(),
            "delta": self.delta.tolist(),
            "sigma_s2": self.sigma_s2,
            "budgets": self.budgets.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DqlcParams":
        return cls(int(data["n_users"]), int(data["n_quantized"]),
                   np.asarray(data["alpha"], dtype=np.float64),
                   np.asarray(data["delta"], dtype=np.float64),
                   float(data["sigma_s2"]),
                   np.asarray(data["budgets"], dtype=np.float64))


def encode(params: DqlcParams, s: np.ndarray) -> np.ndarray:
    """Map a 2K real source vector to the 2K real channel vector."""
    s = np.asarray(s, dtype=np.float64)
    nq = params.n_quantized_real
    out = params.alpha * s
    idx = quantizer_index(s[:nq], params.delta)
    out[:nq] = params.alpha[:nq] * (idx + 0.5)
    return out
