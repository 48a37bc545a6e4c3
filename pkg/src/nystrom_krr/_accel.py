"""Numba acceleration switch.

Hot elementwise kernels (pairwise Gram assembly, Fourier feature maps) have
two implementations: a numba ``@njit(parallel=True)`` loop and a pure-numpy
fallback. Selection happens once at import time:

* ``NYSTROM_KRR_DISABLE_NUMBA=1`` forces the numpy path;
* otherwise numba is used when importable.

Both paths are deterministic; rows are independent, so parallel execution
does not change results. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

DISABLE_FLAG = "NYSTROM_KRR_DISABLE_NUMBA"

# The sandboxed TBB probe is noisy and we only need a working layer, not a
# specific one; omp is always present with numba's bundled dependencies.
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range

USE_NUMBA = HAVE_NUMBA and os.environ.get(DISABLE_FLAG, "0") != "1"
