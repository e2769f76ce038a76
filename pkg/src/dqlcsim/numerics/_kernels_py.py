"""Pure numpy fallback for the decode hot-loop kernels.

Same call signatures as the compiled ``_kernels`` extension so the two are
interchangeable at import time (see ``_backend``).
"""

import math

import numpy as np
from scipy.special import ndtr, ndtri

BACKEND = "python"

_PPF_LO = 1e-320
_PPF_HI = 1.0 - 1e-16


def genz_accumulate(chol, lo, hi, pts):
    """Accumulate box-probability and moment sums over a quasi-random batch.

    Sequential-conditioning transform for N(0, chol@chol.T) restricted to the
    box [lo, hi]: each row of ``pts`` (uniform in [0,1)^d) is mapped to a point
    y inside the whitened box with weight w = prod_i (f_i - e_i).

    Returns (sum_w, sum_w_y, sum_w_yyT); divide by len(pts) outside.
    """
    n, d = pts.shape
    w = np.ones(n)
    y = np.empty((n, d))
    for i in range(d):
        t = y[:, :i] @ chol[i, :i] if i else 0.0
        e = ndtr((lo[i] - t) / chol[i, i])
        f = ndtr((hi[i] - t) / chol[i, i])
        u = e + pts[:, i] * (f - e)
        y[:, i] = ndtri(np.clip(u, _PPF_LO, _PPF_HI))
        w *= f - e
    sum_w = float(w.sum())
    sum_wy = w @ y
    sum_wyy = (w[:, None] * y).T @ y
    return sum_w, sum_wy, sum_wyy


def sphere_enumerate(chol, center, two_r, max_count):
    """Integer vectors l with (l-center)^T L L^T (l-center) < two_r.

    Depth-first Fincke-Pohst over the columns of U = chol.T, last coordinate
    first. Returns an (m, d) int64 array; raises if m would exceed max_count.
    """
    d = chol.shape[0]
    out = []
    lvec = np.zeros(d, dtype=np.int64)

    def descend(i, budget):
        off = 0.0
        for j in range(i + 1, d):
            off += chol[j, i] * (lvec[j] - center[j])
        lii = chol[i, i]
        s = math.sqrt(budget)
        lo = math.ceil(center[i] + (-s - off) / lii)
        hi = math.floor(center[i] + (s - off) / lii)
        if i == 0:
            for li in range(lo, hi + 1):
                u = lii * (li - center[0]) + off
                if budget - u * u > 0.0:
                    lvec[0] = li
                    out.append(lvec.copy())
                    if len(out) > max_count:
                        raise RuntimeError("sphere enumeration overflow")
            return
        for li in range(lo, hi + 1):
            u = lii * (li - center[i]) + off
            rem = budget - u * u
            if rem > 0.0:
                lvec[i] = li
                descend(i - 1, rem)

    if two_r > 0.0:
        descend(d - 1, two_r)
    if not out:
        return np.empty((0, d), dtype=np.int64)
    return np.asarray(out, dtype=np.int64)
