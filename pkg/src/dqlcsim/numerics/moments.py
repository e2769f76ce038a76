"""Moments of multivariate Gaussians restricted to axis-aligned boxes.

The estimator follows the sequential-conditioning construction of Genz-style
integrators: after a Cholesky whitening of the bounded block, each
quasi-random point in [0,1)^d is pushed through the conditional CDFs, giving
an importance-weighted sample of the truncated distribution whose weighted
average simultaneously estimates the box mass and the normalized first and
second moments. Coordinates with infinite bounds never enter the numerical
integral: the restriction only truncates the bounded block, so the remaining
block is handled exactly through the conditional-Gaussian regression onto the
bounded coordinates (law of total covariance).

Masses are probabilities in [0,1]; anything below 1e-300 raises
``NegligibleMassError`` so callers can drop the corresponding candidate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ..errors import InvalidParameterError, NegligibleMassError
from ._backend import kernels
from ._qmc import N_SHIFTS, shifted_points
from .scalars import cholesky_lower

MASS_FLOOR = 1e-300

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [a, b]; entries may be -inf / +inf."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a.shape != b.shape or a.ndim != 1:
            raise InvalidParameterError("box bounds must be 1-D arrays of equal length")
        if not np.all(a < b):
            raise InvalidParameterError("box requires a_i < b_i componentwise")


@dataclass(frozen=True)
class TruncatedMoments:
    """Mass, normalized mean and normalized central covariance of a restriction."""

    mass: float
    mean: np.ndarray
    cov: np.ndarray


def _phi(z):
    out = np.where(np.isfinite(z), np.exp(-0.5 * np.square(np.where(np.isfinite(z), z, 0.0))), 0.0)
    return _INV_SQRT_2PI * out


def _interval_mass(alpha, beta):
    # Tail differences are better conditioned when both ends sit in one tail.
    if alpha > 0.0:
        return float(ndtr(-alpha) - ndtr(-beta))
    return float(ndtr(beta) - ndtr(alpha))


def truncated_1d(mean: float, var: float, a: float, b: float):
    """Closed-form (mass, mean, var) of N(mean, var) restricted to [a, b]."""
    s = np.sqrt(var)
    alpha = (a - mean) / s if np.isfinite(a) else -np.inf
    beta = (b - mean) / s if np.isfinite(b) else np.inf
    z = _interval_mass(alpha, beta)
    if z < MASS_FLOOR:
        raise NegligibleMassError(f"interval mass {z:.3e} under floor")
    pa, pb = _phi(alpha), _phi(beta)
    apa = alpha * pa if np.isfinite(alpha) else 0.0
    bpb = beta * pb if np.isfinite(beta) else 0.0
    ratio = (pa - pb) / z
    m = mean + s * ratio
    v = var * (1.0 + (apa - bpb) / z - ratio * ratio)
    return z, m, max(v, 0.0)


class BoxMomentEngine:
    """Truncated-moment evaluator reusing factorizations across many boxes.

    Built once per covariance C and fixed set of bounded coordinates, then
    queried for many (mu, bounds) pairs — the per-candidate pattern of the
    mixture decoder, where C and the bounded block are shared and only the
    center and the quantizer box change.
    """

    def __init__(self, cov, bounded, accuracy=1e-3, n_start=128, n_max=16384):
        cov = np.asarray(cov, dtype=np.float64)
        dim = cov.shape[0]
        bounded = np.asarray(bounded, dtype=np.intp)
        free = np.setdiff1d(np.arange(dim), bounded)
        self.dim = dim
        self.bounded = bounded
        self.free = free
        self.accuracy = float(accuracy)
        self.n_start = int(n_start)
        self.n_max = int(n_max)

        order = np.concatenate([bounded, free])
        self._order = order
        self._inverse_order = np.argsort(order)
        c_perm = cov[np.ix_(order, order)]
        nb = len(bounded)
        self._nb = nb
        self._c_bb = c_perm[:nb, :nb]
        self._chol_b = cholesky_lower(self._c_bb)
        if len(free):
            c_fb = c_perm[nb:, :nb]
            self._regress = np.linalg.solve(self._c_bb, c_fb.T).T
            self._cond_cov = c_perm[nb:, nb:] - self._regress @ c_fb.T
        else:
            self._regress = np.zeros((0, nb))
            self._cond_cov = np.zeros((0, 0))

    def _bounded_moments(self, lo, hi, accuracy=None):
        """(mass, mean, cov) of N(0, C_bb) on [lo, hi]."""
        nb = self._nb
        if nb == 1:
            mass, m, v = truncated_1d(0.0, self._c_bb[0, 0], lo[0], hi[0])
            return mass, np.array([m]), np.array([[v]])
        accuracy = self.accuracy if accuracy is None else accuracy
        n = self.n_start
        while True:
            total_w = 0.0
            total_wy = np.zeros(nb)
            total_wyy = np.zeros((nb, nb))
            shift_w = np.empty(N_SHIFTS)
            shift_wy = np.empty((N_SHIFTS, nb))
            for s in range(N_SHIFTS):
                pts = shifted_points(n, nb, s)
                sw, swy, swyy = kernels.genz_accumulate(self._chol_b, lo, hi, pts)
                shift_w[s] = sw
                shift_wy[s] = swy
                total_w += sw
                total_wy += swy
                total_wyy += swyy
            mass = total_w / (N_SHIFTS * n)
            if mass < MASS_FLOOR:
                raise NegligibleMassError(f"box mass {mass:.3e} under floor")
            if n >= self.n_max:
                break
            mass_err = np.std(shift_w / n, ddof=1) / np.sqrt(N_SHIFTS)
            if mass_err <= accuracy * mass and np.all(shift_w > 0):
                # also require the (whitened) mean to be settled: spread of the
                # per-shift ratio estimators vs the distribution's own scale
                m_y = total_wy / total_w
                mean_err = np.std(shift_wy / shift_w[:, None], axis=0,
                                  ddof=1) / np.sqrt(N_SHIFTS)
                scale = np.sqrt(np.maximum(np.diag(total_wyy / total_w)
                                           - m_y * m_y, 1e-12)) + np.abs(m_y)
                if np.all(mean_err <= accuracy * scale):
                    break
            n *= 2
        m_y = total_wy / total_w
        cov_y = total_wyy / total_w - np.outer(m_y, m_y)
        mean_b = self._chol_b @ m_y
        cov_b = self._chol_b @ cov_y @ self._chol_b.T
        return min(mass, 1.0), mean_b, cov_b

    def moments(self, mu, lo, hi, accuracy=None) -> TruncatedMoments:
        """Moments of N(mu, C) restricted to {lo <= x[bounded] <= hi}.

        ``lo``/``hi`` are given for the bounded coordinates only, in the order
        of ``self.bounded``; the result is in the original coordinate order.
        ``accuracy`` overrides the engine default for this one evaluation
        (the decoder relaxes it for low-weight mixture components).
        """
        mu = np.asarray(mu, dtype=np.float64)
        mu_b = mu[self.bounded]
        mass, mb0, cov_b = self._bounded_moments(lo - mu_b, hi - mu_b, accuracy)
        mean_b = mu_b + mb0
        if not len(self.free):
            mean = mean_b[self._inverse_order]
            cov = cov_b[np.ix_(self._inverse_order, self._inverse_order)]
            return TruncatedMoments(mass, mean, 0.5 * (cov + cov.T))
        r = self._regress
        mean_f = mu[self.free] + r @ mb0
        cross = cov_b @ r.T
        cov_f = self._cond_cov + r @ cross
        nb = self._nb
        mean = np.empty(self.dim)
        cov = np.empty((self.dim, self.dim))
        mean[:nb] = mean_b
        mean[nb:] = mean_f
        cov[:nb, :nb] = cov_b
        cov[:nb, nb:] = cross
        cov[nb:, :nb] = cross.T
        cov[nb:, nb:] = cov_f
        mean = mean[self._inverse_order]
        cov = cov[np.ix_(self._inverse_order, self._inverse_order)]
        return TruncatedMoments(mass, mean, 0.5 * (cov + cov.T))


def truncated_moments(mu, cov, box: Box, accuracy: float = 1e-3) -> TruncatedMoments:
    """Mass, mean and covariance of N(mu, cov) restricted to ``box``."""
    mu = np.asarray(mu, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    bounded = np.flatnonzero(np.isfinite(box.a) | np.isfinite(box.b))
    if not len(bounded):
        return TruncatedMoments(1.0, mu.copy(), cov.copy())
    engine = BoxMomentEngine(cov, bounded, accuracy=accuracy)
    return engine.moments(mu, box.a[bounded], box.b[bounded])
