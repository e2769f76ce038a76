"""Candidate-lattice construction and sphere-decoder MMSE estimation.

Given a received 2-vector, the posterior over the quantizer index vector l
is proportional to exp(-(l - l_o)^T Lam (l - l_o) / 2) when each candidate's
truncated Gaussian is evaluated at the interval midpoints (quantized block)
and the per-candidate linear-MMSE point (uncoded block). The sphere decoder
enumerates every l inside the ellipsoid of radius R around l_o; each
surviving candidate contributes a truncated Gaussian component whose mass,
mean and covariance combine into the mixture MMSE estimate. All component
weights are combined in log space with max-subtraction because they span
hundreds of orders of magnitude at high SNR.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .codec import DqlcParams
from .errors import (DecodeFailureError, DegeneratePriorError,
                     LatticeConstructionError, NegligibleMassError)
from .numerics import BoxMomentEngine, chi2_inv_cdf, cholesky_lower
from .numerics._backend import kernels

MAX_CANDIDATES = 1 << 20
PROXY_TAIL = 1e-6


def uncoded_conditioning(h_matrix, au_coords, prior_cov, noise_var):
    """Posterior pieces that depend only on the uncoded gains.

    Returns (ce, ce_inv, cc, ct_inv, z) for the observation y = H G_u s + n:
    ce is the conditional covariance of s given y within one candidate,
    cc its quantized/uncoded cross block, ct_inv the inverse of the
    quantized-block Schur complement of the prior (the qq block of ce_inv
    carries no channel information because G_u vanishes there), and z the
    inverse covariance of the uncoded-only receive vector.
    """
    dim = h_matrix.shape[1]
    nq = dim - len(au_coords)
    try:
        prior_cho = cho_factor(prior_cov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise DegeneratePriorError("prior covariance is not positive definite") from exc
    prior_inv = cho_solve(prior_cho, np.eye(dim))
    m_obs = h_matrix.copy()
    m_obs[:, :nq] = 0.0
    m_obs[:, nq:] *= au_coords
    ce_inv = prior_inv + (m_obs.T @ m_obs) / noise_var
    ce_inv = 0.5 * (ce_inv + ce_inv.T)
    try:
        ce = cho_solve(cho_factor(ce_inv, lower=True), np.eye(dim))
    except np.linalg.LinAlgError as exc:
        raise DegeneratePriorError("posterior covariance is singular") from exc
    ce = 0.5 * (ce + ce.T)
    sig_q = prior_cov[:nq, :nq]
    sig_c = prior_cov[:nq, nq:]
    sig_u = prior_cov[nq:, nq:]
    try:
        sig_u_cho = cho_factor(sig_u, lower=True)
    except np.linalg.LinAlgError as exc:
        raise DegeneratePriorError("uncoded prior block is singular") from exc
    ct = sig_q - sig_c @ cho_solve(sig_u_cho, sig_c.T)
    ct = 0.5 * (ct + ct.T)
    ct_inv = cho_solve(cho_factor(ct, lower=True), np.eye(nq))
    ct_inv = 0.5 * (ct_inv + ct_inv.T)
    z = np.linalg.inv(noise_var * np.eye(2) + m_obs @ prior_cov @ m_obs.T)
    z = 0.5 * (z + z.T)
    return ce, ce_inv, ce[:nq, nq:], ct_inv, z


@dataclass(frozen=True)
class DecodeContext:
    """Everything that depends on (H, params, prior, noise) but not on y."""

    params: DqlcParams
    h_matrix: np.ndarray
    prior_mean: np.ndarray
    prior_cov: np.ndarray
    noise_var: float  # per real receive dimension (complex sigma_n^2 / 2)
    nq: int
    ce: np.ndarray
    ce_inv: np.ndarray
    cc: np.ndarray
    ct_inv: np.ndarray
    z: np.ndarray
    hq_aq: np.ndarray        # H_q A_q (2 x nq)
    w: np.ndarray            # (1/v) C_c A_u H_u^T (nq x 2)
    u_vec: np.ndarray        # (1/v) H G_u C_e Sigma^-1 s_bar (2,)
    mu_gain: np.ndarray      # (1/v) C_e (H G_u)^T (2K x 2)
    mu_base: np.ndarray      # s_bar - mu_gain @ H G_u s_bar (2K,)
    engine: BoxMomentEngine

    @property
    def dim(self) -> int:
        return self.h_matrix.shape[1]


def build_context(h_matrix, params: DqlcParams, prior_mean, prior_cov,
                  noise_var: float, moment_accuracy: float = 1e-3) -> DecodeContext:
    """Precompute the per-(prior, channel, params) decode quantities."""
    nq = params.n_quantized_real
    h_matrix = np.asarray(h_matrix, dtype=np.float64)
    prior_mean = np.asarray(prior_mean, dtype=np.float64)
    prior_cov = np.asarray(prior_cov, dtype=np.float64)
    au = params.alpha[nq:]
    ce, ce_inv, cc, ct_inv, z = uncoded_conditioning(h_matrix, au, prior_cov, noise_var)
    hq = h_matrix[:, :nq]
    hu = h_matrix[:, nq:]
    hq_aq = hq * params.alpha[:nq]
    w = (cc * au) @ hu.T / noise_var
    m_obs = np.concatenate([np.zeros((2, nq)), hu * au], axis=1)
    mu_gain = ce @ m_obs.T / noise_var
    prior_cho = cho_factor(prior_cov, lower=True)
    u_vec = m_obs @ (ce @ cho_solve(prior_cho, prior_mean)) / noise_var
    mu_base = prior_mean - mu_gain @ (m_obs @ prior_mean)
    engine = BoxMomentEngine(ce, np.arange(nq), accuracy=moment_accuracy)
    return DecodeContext(params=params, h_matrix=h_matrix, prior_mean=prior_mean,
                         prior_cov=prior_cov, noise_var=noise_var, nq=nq,
                         ce=ce, ce_inv=ce_inv, cc=cc, ct_inv=ct_inv, z=z,
                         hq_aq=hq_aq, w=w, u_vec=u_vec, mu_gain=mu_gain,
                         mu_base=mu_base, engine=engine)


@dataclass(frozen=True)
class LatticeProblem:
    """Quadratic form, center and radius of the candidate search.

    ``radius`` is the chi-squared budget; ``anchor_sq`` is the quadratic form
    of the integer rounding of the center. The enumeration threshold is their
    sum: the chi-squared analysis bounds the spread of the true index around
    the continuous optimum, but evaluating candidates at interval midpoints
    displaces the whole lattice by up to half a cell, which the anchor term
    absorbs (it also makes the search region provably non-empty).
    """

    lam: np.ndarray
    center: np.ndarray
    radius: float
    chol: np.ndarray  # lower, lam = chol @ chol.T
    anchor_sq: float = 0.0

    @property
    def search_bound(self) -> float:
        """Quadratic-form threshold actually used for enumeration."""
        return 2.0 * self.radius + self.anchor_sq


def build_lattice(ctx: DecodeContext, y, tau: float) -> LatticeProblem:
    """Assemble the search lattice for received vector y at coverage 1-tau."""
    y = np.asarray(y, dtype=np.float64)
    delta = ctx.params.delta
    half_step = 0.5 * ctx.hq_aq.sum(axis=1)  # (1/2) H_q A_q 1
    sbar_q = ctx.prior_mean[:ctx.nq]
    sbar_u = ctx.prior_mean[ctx.nq:]
    hu_au = ctx.h_matrix[:, ctx.nq:] * ctx.params.alpha[ctx.nq:]
    b_mat = np.diag(delta) + ctx.w @ ctx.hq_aq
    v_vec = ctx.w @ (y - half_step - hu_au @ sbar_u) - 0.5 * delta + sbar_q
    m_vec = ctx.hq_aq.T @ (ctx.z @ (y - half_step) - ctx.u_vec)
    bt_ct = b_mat.T @ ctx.ct_inv
    lam = bt_ct @ b_mat + ctx.hq_aq.T @ ctx.z @ ctx.hq_aq
    lam = 0.5 * (lam + lam.T)
    try:
        chol = cholesky_lower(lam)
    except Exception as exc:
        raise LatticeConstructionError("candidate lattice is not positive definite") from exc
    rhs = bt_ct @ v_vec + m_vec
    center = cho_solve((chol, True), rhs)
    radius = 0.5 * chi2_inv_cdf(1.0 - tau, ctx.dim + ctx.nq)
    anchor = _babai_point(chol, center) - center
    anchor_sq = float(anchor @ lam @ anchor)
    return LatticeProblem(lam=lam, center=center, radius=radius, chol=chol,
                          anchor_sq=anchor_sq)


def _babai_point(chol, center):
    """Nearest-plane rounding of the center; its quadratic form is at most
    sum_k (chol_kk / 2)^2, unlike naive per-coordinate rounding."""
    d = len(center)
    point = np.zeros(d)
    for i in range(d - 1, -1, -1):
        off = chol[i + 1:, i] @ (point[i + 1:] - center[i + 1:])
        point[i] = np.round(center[i] - off / chol[i, i])
    return point


def sphere_enumerate(problem: LatticeProblem, max_count: int = MAX_CANDIDATES) -> np.ndarray:
    """All integer vectors with (l-center)^T Lam (l-center) < search_bound."""
    return kernels.sphere_enumerate(problem.chol, problem.center,
                                    problem.search_bound, max_count)


@dataclass
class DecodeStats:
    n_candidates: int = 0     # enumerated by the sphere decoder
    n_integrated: int = 0     # truncated-Gaussian integrals actually solved
    n_effective: float = 0.0  # inverse participation of the mixture weights
    retries: int = 0
    fallback: bool = False


def decode_mmse(ctx: DecodeContext, y, problem: LatticeProblem,
                candidates=None, include_spread: bool = False):
    """Mixture MMSE estimate over the enumerated candidate set.

    Returns (s_hat, sigma_hat, stats). Component weights are phi_l * tau_l
    with tau_l the box mass and the truncated mean/covariance normalized, so
    the quotient matches the exact conditional-mean expression. Candidates
    are integrated in increasing quadratic-form order and the integration
    stops past the chi-squared window above the best candidate: those
    components sit below exp(-radius) relative weight, harmless to the
    estimate but dominant in the compute cost. sigma_hat is the mass-weighted
    component covariance; ``include_spread`` adds the between-component
    spread term (off by default: the update as printed in the source
    algorithm omits it).
    """
    y = np.asarray(y, dtype=np.float64)
    if candidates is None:
        candidates = sphere_enumerate(problem)
    n_cand = len(candidates)
    if n_cand == 0:
        raise DecodeFailureError("empty candidate set")
    diffs = (candidates - problem.center) @ problem.chol
    qforms = np.einsum("ij,ij->i", diffs, diffs)
    order = np.argsort(qforms, kind="stable")
    excess = qforms[order] - qforms[order[0]]
    # integrate within the chi-squared window, and stop once the proxy-weight
    # tail of the remaining candidates is negligible against the total
    proxy = np.exp(-0.5 * np.minimum(excess, 1400.0))
    csum = np.cumsum(proxy)
    first_ok = int(np.argmax(csum[-1] - csum <= PROXY_TAIL * csum[-1]))
    # both masks cut tails of the sorted order, so `keep` is a contiguous
    # prefix and positions within it still index `proxy`/`excess` directly
    keep = order[(excess <= 2.0 * problem.radius)
                 & (np.arange(len(order)) <= first_ok)]
    delta = ctx.params.delta
    log_w = np.full(len(keep), -np.inf)
    means = np.zeros((len(keep), ctx.dim))
    covs = np.zeros((len(keep), ctx.dim, ctx.dim))
    n_used = 0
    base_acc = ctx.engine.accuracy
    for i, idx in enumerate(keep):
        lvec = candidates[idx]
        y_l = y - ctx.hq_aq @ (lvec + 0.5)
        mu_l = ctx.mu_base + ctx.mu_gain @ y_l
        log_phi = -0.5 * (y_l @ y_l / ctx.noise_var - mu_l @ ctx.ce_inv @ mu_l)
        # low-weight components only need accuracy relative to the mixture
        acc = min(base_acc / max(proxy[i], base_acc), 0.25)
        try:
            tm = ctx.engine.moments(mu_l, delta * lvec, delta * (lvec + 1),
                                    accuracy=acc)
        except NegligibleMassError:
            continue
        log_w[i] = log_phi + np.log(tm.mass)
        means[i] = tm.mean
        covs[i] = tm.cov
        n_used += 1
    if n_used == 0:
        raise DecodeFailureError("all candidate masses underflowed")
    log_w -= log_w.max()
    weights = np.exp(log_w)
    weights /= weights.sum()
    s_hat = weights @ means
    sigma_hat = np.einsum("i,ijk->jk", weights, covs)
    if include_spread:
        centered = means - s_hat
        sigma_hat = sigma_hat + (weights[:, None] * centered).T @ centered
    stats = DecodeStats(n_candidates=n_cand, n_integrated=n_used,
                        n_effective=float(1.0 / np.sum(weights * weights)))
    return s_hat, 0.5 * (sigma_hat + sigma_hat.T), stats


def decode_with_retries(ctx: DecodeContext, y, tau: float, max_retries: int = 3,
                        include_spread: bool = False):
    """Decode, widening the sphere (tau/10) on empty sets; prior fallback last.

    The coverage criterion makes empties rare (probability ~tau); when the
    enlarged spheres still come up empty the prior mean/covariance stand in
    for the estimate and the event is flagged in the stats.
    """
    tau_eff = tau
    for attempt in range(max_retries + 1):
        problem = build_lattice(ctx, y, tau_eff)
        try:
            s_hat, sigma_hat, stats = decode_mmse(ctx, y, problem,
                                                  include_spread=include_spread)
            stats.retries = attempt
            return s_hat, sigma_hat, stats
        except DecodeFailureError:
            tau_eff /= 10.0
        except RuntimeError:
            break  # enumeration overflow: widening would only make it worse
    stats = DecodeStats(retries=max_retries, fallback=True)
    return ctx.prior_mean.copy(), ctx.prior_cov.copy(), stats
