"""Benchmark the numba kernels against the pure-numpy fallbacks.

The dispatch threshold in nystrom_krr.kernels sends small builds to numpy
automatically; this script times both implementations directly at sizes
where the numba path is expected to win. Run:

    python benchmarks/bench_kernels.py [--repeats 5]

Setting NYSTROM_KRR_DISABLE_NUMBA=1 makes the package itself use the numpy
path everywhere; the benchmark always times both.
"""

import argparse
import time

import numpy as np

from nystrom_krr import _accel
from nystrom_krr.kernels import (
    _fourier_basis_numpy,
    _pairwise_gram_numpy,
)


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    from nystrom_krr.kernels import _fourier_basis_numba, _pairwise_gram_numba

    rng = np.random.default_rng(0)
    rows = []

    for n, t in ((4096, 512), (16384, 2048)):
        xs = rng.uniform(0.0, 1.0, n)
        _fourier_basis_numba(xs, t)  # compile
        nb = best_of(lambda: _fourier_basis_numba(xs, t), args.repeats)
        np_t = best_of(lambda: _fourier_basis_numpy(xs, t), args.repeats)
        rows.append((f"fourier_basis {n}x{t}", nb, np_t))

    for n, m in ((2048, 2048), (8192, 1024)):
        xs, ys = rng.uniform(0, 1, n), rng.uniform(0, 1, m)
        for gaussian, name in ((True, "gaussian"), (False, "laplacian")):
            _pairwise_gram_numba(xs, ys, 0.7, gaussian)
            nb = best_of(lambda: _pairwise_gram_numba(xs, ys, 0.7, gaussian), args.repeats)
            np_t = best_of(lambda: _pairwise_gram_numpy(xs, ys, 0.7, gaussian), args.repeats)
            rows.append((f"{name}_gram {n}x{m}", nb, np_t))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>9}  {'numpy':>9}  speedup")
    for name, nb, np_t in rows:
        print(f"{name:<{width}}  {nb * 1e3:>7.1f}ms  {np_t * 1e3:>7.1f}ms  {np_t / nb:>6.2f}x")


if __name__ == "__main__":
    main()
