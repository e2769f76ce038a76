"""Kernel backend selection.

The two hot kernels have different optimal homes (see benchmarks/):
the depth-first sphere enumeration is sequential and gains 1-2 orders of
magnitude from the compiled extension, while the box-moment accumulation is
batch-vectorizable and runs fastest through numpy/scipy's vectorized special
functions. The default therefore mixes them; ``DQLCSIM_KERNELS`` overrides:

    auto (default) - compiled enumeration when built, numpy accumulation
    cython         - both from the compiled extension (error if not built)
    python         - both from the pure numpy fallback
"""

import os
from types import SimpleNamespace

from . import _kernels_py

_forced = os.environ.get("DQLCSIM_KERNELS", "auto").strip().lower() or "auto"
if _forced not in ("auto", "python", "cython"):
    raise ValueError(
        f"DQLCSIM_KERNELS must be 'auto', 'python' or 'cython', got {_forced!r}")

_compiled = None
if _forced in ("auto", "cython"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        if _forced == "cython":
            raise

if _forced == "cython":
    kernels = SimpleNamespace(
        BACKEND="cython",
        sphere_enumerate=_compiled.sphere_enumerate,
        genz_accumulate=_compiled.genz_accumulate,
    )
elif _forced == "auto" and _compiled is not None:
    kernels = SimpleNamespace(
        BACKEND="cython+numpy",
        sphere_enumerate=_compiled.sphere_enumerate,
        genz_accumulate=_kernels_py.genz_accumulate,
    )
else:
    kernels = SimpleNamespace(
        BACKEND="python",
        sphere_enumerate=_kernels_py.sphere_enumerate,
        genz_accumulate=_kernels_py.genz_accumulate,
    )


def backend_name() -> str:
    """Active kernel mix ('cython+numpy', 'cython', or 'python')."""
    return kernels.BACKEND
