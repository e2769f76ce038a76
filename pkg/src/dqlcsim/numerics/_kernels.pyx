# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled decode hot-loop kernels: sequential-conditioning box moments and
depth-first sphere enumeration. Mirrors the signatures of ``_kernels_py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, ceil, erfc, exp, floor, log, sqrt

cnp.import_array()

BACKEND = "cython"

cdef double SQRT1_2 = 0.7071067811865476
cdef double SQRT_2PI = 2.5066282746310002
cdef double PPF_LO = 1e-320
cdef double PPF_HI = 1.0 - 1e-16


cdef inline double norm_cdf(double x) noexcept nogil:
    return 0.5 * erfc(-x * SQRT1_2)


cdef double norm_ppf(double p) noexcept nogil:
    """Acklam's rational approximation plus one Halley refinement."""
    cdef double q, r, x, e, u
    if p < 0.02425:
        q = sqrt(-2.0 * log(p))
        x = (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
              + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
               + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    elif p <= 0.97575:
        q = p - 0.5
        r = q * q
        x = (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
                - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
              - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q / \
            (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
                - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
              - 1.328068155288572e+01) * r + 1.0)
    else:
        q = sqrt(-2.0 * log(1.0 - p))
        x = -(((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                 - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
               + 4.374664141464968e+00) * q + 2.938163982698783e+00) / \
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
               + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    if x * x < 1400.0:  # refinement overflows exp beyond the far tail
        e = norm_cdf(x) - p
        u = e * SQRT_2PI * exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def genz_accumulate(double[:, ::1] chol, double[::1] lo, double[::1] hi,
                    const double[:, ::1] pts):
    """Weighted sums (sum_w, sum_w*y, sum_w*y*y^T) over one point batch."""
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    cdef cnp.ndarray[double, ndim=1] sum_wy = np.zeros(d)
    cdef cnp.ndarray[double, ndim=2] sum_wyy = np.zeros((d, d))
    cdef cnp.ndarray[double, ndim=1] ybuf = np.empty(d)
    cdef double[::1] y = ybuf
    cdef double[::1] swy = sum_wy
    cdef double[:, ::1] swyy = sum_wyy
    cdef double sum_w = 0.0
    cdef Py_ssize_t k, i, j
    cdef double w, t, lii, e, f, df, u, wyi
    with nogil:
        for k in range(n):
            w = 1.0
            for i in range(d):
                t = 0.0
                for j in range(i):
                    t += chol[i, j] * y[j]
                lii = chol[i, i]
                e = norm_cdf((lo[i] - t) / lii) if lo[i] != -INFINITY else 0.0
                f = norm_cdf((hi[i] - t) / lii) if hi[i] != INFINITY else 1.0
                df = f - e
                if df <= 0.0:
                    w = 0.0
                    break
                u = e + pts[k, i] * df
                if u < PPF_LO:
                    u = PPF_LO
                elif u > PPF_HI:
                    u = PPF_HI
                y[i] = norm_ppf(u)
                w *= df
            if w > 0.0:
                sum_w += w
                for i in range(d):
                    wyi = w * y[i]
                    swy[i] += wyi
                    for j in range(i + 1):
                        swyy[i, j] += wyi * y[j]
    for i in range(d):
        for j in range(i):
            sum_wyy[j, i] = sum_wyy[i, j]
    return sum_w, sum_wy, sum_wyy


def sphere_enumerate(double[:, ::1] chol, double[::1] center, double two_r,
                     long max_count):
    """Integer vectors l with (l-center)^T chol chol^T (l-center) < two_r."""
    cdef Py_ssize_t d = chol.shape[0]
    if two_r <= 0.0:
        return np.empty((0, d), dtype=np.int64)
    cdef Py_ssize_t cap = 1024
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((cap, d), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] outv = out
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lbuf = np.zeros(d, dtype=np.int64)
    cdef cnp.int64_t[::1] lvec = lbuf
    cdef cnp.ndarray[cnp.int64_t, ndim=1] curbuf = np.zeros(d, dtype=np.int64)
    cdef cnp.int64_t[::1] cur = curbuf
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hibuf = np.zeros(d, dtype=np.int64)
    cdef cnp.int64_t[::1] hilim = hibuf
    cdef cnp.ndarray[double, ndim=1] budbuf = np.zeros(d, dtype=np.float64)
    cdef double[::1] budget = budbuf
    cdef cnp.ndarray[double, ndim=1] offbuf = np.zeros(d, dtype=np.float64)
    cdef double[::1] off = offbuf
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t i, j
    cdef double s, t, lii, u, rem

    i = d - 1
    budget[i] = two_r
    # enter level i
    while True:
        t = 0.0
        for j in range(i + 1, d):
            t += chol[j, i] * (lvec[j] - center[j])
        off[i] = t
        lii = chol[i, i]
        s = sqrt(budget[i])
        cur[i] = <cnp.int64_t>ceil(center[i] + (-s - t) / lii) - 1
        hilim[i] = <cnp.int64_t>floor(center[i] + (s - t) / lii)
        # advance within levels
        while True:
            cur[i] += 1
            if cur[i] > hilim[i]:
                i += 1
                if i == d:
                    return out[:count].copy()
                continue
            u = chol[i, i] * (cur[i] - center[i]) + off[i]
            rem = budget[i] - u * u
            if rem <= 0.0:
                continue
            lvec[i] = cur[i]
            if i == 0:
                if count == cap:
                    if 2 * cap > max_count:
                        raise RuntimeError("sphere enumeration overflow")
                    cap *= 2
                    out = np.resize(out, (cap, d))
                    outv = out
                for j in range(d):
                    outv[count, j] = lvec[j]
                count += 1
                if count > max_count:
                    raise RuntimeError("sphere enumeration overflow")
                continue
            budget[i - 1] = rem
            i -= 1
            break  # descend: re-enter outer loop to set up level i
