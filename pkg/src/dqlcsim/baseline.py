"""Uncoded baseline: scaled transmission with joint linear MMSE decoding.

Users send gain_k * s_k at full power (gain_k = sqrt(T_k); the per-user
optimal allocation is intentionally not modeled here). Temporal correlation
is exploited by the standard linear Kalman recursion over the same AR model;
the memoryless variant resets the prior to the stationary distribution at
every step.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, real_channel_matrix, transmit
from .kalman import BlockStats, predict
from .source import RealLayout, SourceBlock, SourceModel


@dataclass(frozen=True)
class LinearScheme:
    """Per-user linear gains subject to gain_k <= sqrt(T_k)."""

    gains: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gains", np.asarray(self.gains, dtype=np.float64))

    @classmethod
    def full_power(cls, budgets) -> "LinearScheme":
        return cls(np.sqrt(np.asarray(budgets, dtype=np.float64)))


def linear_encode(s_real, gain_coords) -> np.ndarray:
    return np.asarray(gain_coords) * np.asarray(s_real, dtype=np.float64)


def linear_mmse_decode(y, h_matrix, gain_coords, prior_mean, prior_cov,
                       noise_var):
    """Gaussian conditioning of the prior on y = H diag(g) s + n."""
    m_obs = h_matrix * gain_coords
    s_xy = prior_cov @ m_obs.T
    s_yy = m_obs @ s_xy + noise_var * np.eye(2)
    gain = np.linalg.solve(s_yy, s_xy.T).T
    mean = prior_mean + gain @ (y - m_obs @ prior_mean)
    cov = prior_cov - gain @ s_xy.T
    return mean, 0.5 * (cov + cov.T)


@dataclass
class LinearState:
    prior_mean: np.ndarray
    prior_cov: np.ndarray


def linear_kf_run(model: SourceModel, realization: ChannelRealization,
                  block: SourceBlock, scheme: LinearScheme,
                  rng: np.random.Generator, use_prior: bool = True,
                  n_quantized: int = 1, state: LinearState | None = None):
    """Linear predict/update over a block; memoryless when use_prior=False.

    n_quantized only fixes the coordinate layout so results are directly
    comparable with the quantized schemes (the layout permutation does not
    change the estimates).
    """
    layout = RealLayout(model.n_users, n_quantized)
    stationary = layout.cov_to_real(model.spatial_cov)
    innovation = layout.cov_to_real(model.innovation_cov)
    h_matrix = real_channel_matrix(realization, layout)
    noise_var = 0.5 * realization.sigma_n2
    gain_coords = layout.expand_users(scheme.gains)
    if state is None:
        state = LinearState(prior_mean=np.zeros(layout.n_real),
                            prior_cov=stationary.copy())
    stats = BlockStats()
    estimates = np.empty((block.length, model.n_users), dtype=np.complex128)
    for t in range(block.length):
        s_real = layout.to_real(block.symbols[t])
        x = linear_encode(s_real, gain_coords)
        y = transmit(h_matrix, x, realization.sigma_n2, rng)
        t0 = time.perf_counter()
        mean, cov = linear_mmse_decode(y, h_matrix, gain_coords,
                                       state.prior_mean, state.prior_cov,
                                       noise_var)
        stats.decode_seconds += time.perf_counter() - t0
        estimates[t] = layout.to_complex(mean)
        err = float(np.sum(np.abs(estimates[t] - block.symbols[t]) ** 2))
        stats.sq_error += err
        stats.per_symbol_mse.append(err / model.n_users)
        stats.n_symbols += 1
        if use_prior:
            pm, pc = predict(mean, cov, model.phi, innovation)
        else:
            pm, pc = np.zeros(layout.n_real), stationary.copy()
        state.prior_mean, state.prior_cov = pm, pc
    return estimates, stats, state
