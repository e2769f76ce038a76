"""Per-block nonlinear Kalman decoding loop.

Each time step: (re)optimize the mapping for the current predicted
covariance when it has drifted, encode the true source vector, transmit,
decode with the sphere-decoder MMSE estimator using the prediction as prior,
then propagate mean and covariance through the AR transition. Disabling the
prior resets it to the stationary (0, C_s) every step, which is the
memoryless decoder used for the no-temporal-correlation comparisons.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, real_channel_matrix, transmit
from .codec import DqlcParams, encode
from .lattice import build_context, decode_with_retries
from .optimizer import OptimizerConfig, optimal_powers, optimize
from .source import RealLayout, SourceBlock, SourceModel


@dataclass(frozen=True)
class KfState:
    """Prediction and posterior of one decoding step."""

    prior_mean: np.ndarray
    prior_cov: np.ndarray
    post_mean: np.ndarray | None = None
    post_cov: np.ndarray | None = None


def predict(post_mean, post_cov, phi: float, innovation_cov):
    """AR transition: mean scales by phi, covariance contracts plus innovation."""
    prior_mean = phi * np.asarray(post_mean, dtype=np.float64)
    cov = phi * phi * np.asarray(post_cov, dtype=np.float64) + innovation_cov
    return prior_mean, 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class DecodeConfig:
    tau: float = 1e-4
    moment_accuracy: float = 1e-3
    max_retries: int = 3
    include_spread: bool = False


@dataclass
class BlockStats:
    """Aggregates of one decoded block (extended in place when chaining)."""

    n_symbols: int = 0
    sq_error: float = 0.0           # complex-domain squared error sum
    candidates: float = 0.0         # effective mixture sizes, summed over t
    integrals: int = 0              # truncated-Gaussian integrals solved
    retries: int = 0
    fallbacks: int = 0
    opt_count: int = 0
    opt_evals: int = 0
    decode_seconds: float = 0.0
    per_symbol_mse: list = field(default_factory=list)
    post_traces: list = field(default_factory=list)


@dataclass
class CarriedState:
    """Decoder memory across block boundaries (for chained runs)."""

    prior_mean: np.ndarray
    prior_cov: np.ndarray
    params: DqlcParams | None = None
    cov_at_opt: np.ndarray | None = None
    powers: np.ndarray | None = None


def _needs_reopt(prior_cov, cov_at_opt, threshold: float) -> bool:
    if cov_at_opt is None:
        return True
    drift = np.linalg.norm(prior_cov - cov_at_opt)
    return drift > threshold * np.linalg.norm(cov_at_opt)


def run_block(model: SourceModel, realization: ChannelRealization,
              block: SourceBlock, n_quantized: int, rng: np.random.Generator,
              dec_cfg: DecodeConfig = DecodeConfig(),
              opt_cfg: OptimizerConfig = OptimizerConfig(),
              budgets: np.ndarray | None = None,
              use_prior: bool = True, fixed_params: DqlcParams | None = None,
              reopt_threshold: float = 0.01, exact_reopt: bool = False,
              state: CarriedState | None = None):
    """Decode one block; returns (estimates (T,K) complex, stats, state).

    ``fixed_params`` bypasses optimization entirely; otherwise ``budgets``
    (per-user power limits) are required, the mapping is optimized at the
    first step and re-optimized whenever the predicted covariance drifts more
    than ``reopt_threshold`` (relative Frobenius) from the one last optimized
    for (every step when ``exact_reopt``).
    """
    if fixed_params is None and budgets is None:
        raise ValueError("budgets are required unless fixed_params is given")
    layout = RealLayout(model.n_users, n_quantized)
    stationary = layout.cov_to_real(model.spatial_cov)
    innovation = layout.cov_to_real(model.innovation_cov)
    h_matrix = real_channel_matrix(realization, layout)
    noise_var = 0.5 * realization.sigma_n2
    if state is None:
        state = CarriedState(prior_mean=np.zeros(layout.n_real),
                             prior_cov=stationary.copy())
    stats = BlockStats()
    estimates = np.empty((block.length, model.n_users), dtype=np.complex128)

    params = fixed_params if fixed_params is not None else state.params
    for t in range(block.length):
        if fixed_params is None and (params is None or exact_reopt or
                                     _needs_reopt(state.prior_cov,
                                                  state.cov_at_opt,
                                                  reopt_threshold)):
            result = optimize(h_matrix, state.prior_cov, budgets, n_quantized,
                              opt_cfg, noise_var, warm_start=state.powers)
            params = result.params
            state.params = params
            state.cov_at_opt = state.prior_cov.copy()
            state.powers = optimal_powers(params)
            stats.opt_count += 1
            stats.opt_evals += result.n_evals
        s_real = layout.to_real(block.symbols[t])
        x = encode(params, s_real)
        y = transmit(h_matrix, x, realization.sigma_n2, rng)
        t0 = time.perf_counter()
        ctx = build_context(h_matrix, params, state.prior_mean, state.prior_cov,
                            noise_var, dec_cfg.moment_accuracy)
        s_hat, post_cov, dstats = decode_with_retries(
            ctx, y, dec_cfg.tau, dec_cfg.max_retries, dec_cfg.include_spread)
        stats.decode_seconds += time.perf_counter() - t0
        estimates[t] = layout.to_complex(s_hat)
        err = float(np.sum(np.abs(estimates[t] - block.symbols[t]) ** 2))
        stats.sq_error += err
        stats.per_symbol_mse.append(err / model.n_users)
        stats.n_symbols += 1
        stats.candidates += dstats.n_effective
        stats.integrals += dstats.n_integrated
        stats.retries += dstats.retries
        stats.fallbacks += int(dstats.fallback)
        stats.post_traces.append(float(np.trace(post_cov)))
        if use_prior:
            pm, pc = predict(s_hat, post_cov, model.phi, innovation)
        else:
            pm, pc = np.zeros(layout.n_real), stationary.copy()
        state.prior_mean, state.prior_cov = pm, pc
    return estimates, stats, state
