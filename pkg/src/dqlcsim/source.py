"""Spatio-temporally correlated complex Gaussian sources.

User symbols follow a first-order autoregression s_t = phi*s_{t-1} + w_t with
circularly symmetric innovations scaled so the stationary covariance stays at
the unit-diagonal spatial covariance C_s. A fixed coordinate layout maps the
K complex symbols onto 2K real coordinates with the quantized users' real and
imaginary parts occupying the leading contiguous block, which is what the
decoder's box algebra indexes.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidParameterError


class CorrelationKind(str, Enum):
    UNIFORM = "uniform"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class CorrelationSpec:
    """Spatial correlation structure: equal off-diagonals or rho^|i-j| decay."""

    kind: CorrelationKind
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "kind", CorrelationKind(self.kind))
        if not 0.0 <= self.rho < 1.0:
            raise InvalidParameterError(f"rho must be in [0,1), got {self.rho}")


def build_covariance(n_users: int, spec: CorrelationSpec) -> np.ndarray:
    """Unit-diagonal spatial covariance for K users under ``spec``."""
    if n_users < 1:
        raise InvalidParameterError(f"need at least one user, got {n_users}")
    if spec.kind is CorrelationKind.UNIFORM:
        cov = np.full((n_users, n_users), spec.rho)
        np.fill_diagonal(cov, 1.0)
    else:
        idx = np.arange(n_users)
        cov = spec.rho ** np.abs(idx[:, None] - idx[None, :])
    return cov


@dataclass(frozen=True)
class SourceModel:
    """AR(1) source: transition phi*I, innovation covariance (1-phi^2)*C_s."""

    n_users: int
    spatial_cov: np.ndarray
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.phi < 1.0:
            raise InvalidParameterError(f"phi must be in [0,1), got {self.phi}")
        cov = np.asarray(self.spatial_cov, dtype=np.float64)
        if cov.shape != (self.n_users, self.n_users):
            raise InvalidParameterError("spatial covariance shape mismatch")
        object.__setattr__(self, "spatial_cov", cov)

    @property
    def innovation_cov(self) -> np.ndarray:
        return (1.0 - self.phi**2) * self.spatial_cov

    @classmethod
    def from_spec(cls, n_users: int, spec: CorrelationSpec, phi: float) -> "SourceModel":
        return cls(n_users, build_covariance(n_users, spec), phi)


@dataclass(frozen=True)
class SourceBlock:
    """T consecutive source vectors, one row per time instant."""

    symbols: np.ndarray  # (T, K) complex

    @property
    def length(self) -> int:
        return self.symbols.shape[0]


def _complex_gaussian(chol: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    # Circularly symmetric with covariance chol@chol.T: each part carries half.
    z = rng.standard_normal((2, n, chol.shape[0]))
    return ((z[0] + 1j * z[1]) / np.sqrt(2.0)) @ chol.T


def generate_block(model: SourceModel, length: int, rng: np.random.Generator) -> SourceBlock:
    """Draw a block: s_1 ~ CN(0, C_s), then the AR recursion."""
    if length < 1:
        raise InvalidParameterError(f"block length must be >= 1, got {length}")
    chol_s = np.linalg.cholesky(model.spatial_cov)
    symbols = np.empty((length, model.n_users), dtype=np.complex128)
    symbols[0] = _complex_gaussian(chol_s, 1, rng)[0]
    if length > 1:
        scale = np.sqrt(1.0 - model.phi**2)
        noise = _complex_gaussian(chol_s, length - 1, rng) * scale
        for t in range(1, length):
            symbols[t] = model.phi * symbols[t - 1] + noise[t - 1]
    return SourceBlock(symbols)


def to_real(v: np.ndarray) -> np.ndarray:
    """Stack real parts then imaginary parts; norm-preserving."""
    v = np.asarray(v)
    return np.concatenate([v.real, v.imag]).astype(np.float64)


@dataclass(frozen=True)
class RealLayout:
    """Fixed permutation of the stacked real coordinates.

    Order: [Re q-users, Im q-users, Re u-users, Im u-users], so the first
    2*K_q coordinates are exactly the quantized ones. Applied consistently to
    source vectors, per-coordinate gains/steps, covariances and the channel.
    """

    n_users: int
    n_quantized: int
    order: np.ndarray = field(init=False)

    def __post_init__(self):
        k, kq = self.n_users, self.n_quantized
        if not 1 <= kq <= k - 1:
            raise InvalidParameterError(f"need 1 <= K_q <= K-1, got K_q={kq}, K={k}")
        order = np.concatenate([
            np.arange(kq),            # Re of quantized users
            k + np.arange(kq),        # Im of quantized users
            np.arange(kq, k),         # Re of uncoded users
            k + np.arange(kq, k),     # Im of uncoded users
        ])
        object.__setattr__(self, "order", order)

    @property
    def n_real(self) -> int:
        return 2 * self.n_users

    @property
    def n_quantized_real(self) -> int:
        return 2 * self.n_quantized

    def to_real(self, v: np.ndarray) -> np.ndarray:
        return to_real(v)[self.order]

    def to_complex(self, x: np.ndarray) -> np.ndarray:
        plain = np.empty(self.n_real)
        plain[self.order] = x
        k = self.n_users
        return plain[:k] + 1j * plain[k:]

    def expand_users(self, values: np.ndarray) -> np.ndarray:
        """Per-user values -> per-real-coordinate values (duplicated re/im)."""
        vals = np.asarray(values, dtype=np.float64)
        return np.concatenate([vals, vals])[self.order]

    def cov_to_real(self, cov: np.ndarray) -> np.ndarray:
        """Real-coordinate covariance of a circularly symmetric CN(0, cov)."""
        k = self.n_users
        full = np.zeros((2 * k, 2 * k))
        full[:k, :k] = 0.5 * np.asarray(cov, dtype=np.float64)
        full[k:, k:] = full[:k, :k]
        return full[np.ix_(self.order, self.order)]
