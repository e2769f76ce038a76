"""Benchmark the compiled decode kernels against the pure numpy fallback.

Times the two hot inner loops on representative decode workloads:
sphere enumeration (depth-first search over the candidate lattice) and the
sequential-conditioning box-moment accumulation. Run after building the
extension:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from dqlcsim.numerics import _kernels_py as kpy
from dqlcsim.numerics._qmc import shifted_points

try:
    from dqlcsim.numerics import _kernels as kcy
except ImportError:
    kcy = None


def _timeit(fn, repeats):
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def sphere_case(dim, spacing, bound, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim))
    lam = a @ a.T + spacing * np.eye(dim)
    chol = np.linalg.cholesky(lam)
    center = rng.standard_normal(dim)
    return chol, center, bound


def moments_case(dim, width, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim))
    cov = a @ a.T / dim + np.eye(dim)
    chol = np.linalg.cholesky(cov)
    lo = rng.standard_normal(dim) * 0.3
    hi = lo + width
    return chol, lo, hi


def run():
    if kcy is None:
        print("compiled kernels not built; only timing the python fallback")
    rows = []
    for dim, spacing, bound in [(2, 4.0, 40.0), (4, 8.0, 60.0), (8, 30.0, 90.0)]:
        chol, center, b = sphere_case(dim, spacing, bound, seed=dim)
        n_found = len(kpy.sphere_enumerate(chol, center, b, 1 << 22))
        t_py = _timeit(lambda: kpy.sphere_enumerate(chol, center, b, 1 << 22), 20)
        t_cy = (_timeit(lambda: kcy.sphere_enumerate(chol, center, b, 1 << 22), 200)
                if kcy else float("nan"))
        rows.append((f"sphere d={dim} ({n_found} pts)", t_py, t_cy))
    for dim, n_pts in [(2, 1024), (4, 1024), (8, 2048)]:
        chol, lo, hi = moments_case(dim, 0.8, seed=dim)
        pts = shifted_points(n_pts, dim, 0)
        t_py = _timeit(lambda: kpy.genz_accumulate(chol, lo, hi, pts), 20)
        t_cy = (_timeit(lambda: kcy.genz_accumulate(chol, lo, hi, pts), 50)
                if kcy else float("nan"))
        rows.append((f"moments d={dim} n={n_pts}", t_py, t_cy))
        if kcy:
            swp, _, _ = kpy.genz_accumulate(chol, lo, hi, pts)
            swc, _, _ = kcy.genz_accumulate(chol, lo, hi, pts)
            assert abs(swp - swc) <= 1e-9 * max(abs(swp), 1.0), "backend mismatch"

    header = f"{'case':<28} {'python':>12} {'cython':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, t_py, t_cy in rows:
        ratio = t_py / t_cy if t_cy == t_cy else float("nan")
        print(f"{name:<28} {t_py * 1e6:>10.1f}us {t_cy * 1e6:>10.1f}us {ratio:>8.1f}x")


if __name__ == "__main__":
    run()
