"""Deterministic quasi-random point sets for the box-moment estimator.

Scrambled Sobol sequences, one independent scrambling per shift index, so
the spread across shifts yields an error estimate while each individual set
keeps the low-discrepancy convergence rate. Scramblings are seeded by fixed
constants: the same (n, d, shift index) always produces the same points,
which keeps decoding reproducible and independent of candidate evaluation
order. Sets are cached because the decoder requests the same shapes for
every candidate.
"""

from functools import lru_cache

import numpy as np
from scipy.stats import qmc

_SHIFT_SEED = 20190801
N_SHIFTS = 8
_MAX_DIM = 21201  # Sobol dimension limit in scipy


@lru_cache(maxsize=128)
def _cached(n: int, d: int, shift_index: int) -> np.ndarray:
    if d > _MAX_DIM:
        raise ValueError(f"box-moment estimator supports up to {_MAX_DIM} bounded dims")
    if n & (n - 1):
        raise ValueError(f"point counts must be powers of two, got {n}")
    sampler = qmc.Sobol(d, scramble=True, seed=_SHIFT_SEED + shift_index)
    pts = sampler.random_base2(int(np.log2(n)))
    pts.setflags(write=False)
    return pts


def shifted_points(n: int, d: int, shift_index: int) -> np.ndarray:
    """(n, d) scrambled-Sobol points in [0,1) for the given shift index."""
    return _cached(n, d, shift_index)
