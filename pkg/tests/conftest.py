import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    """Trigger the numba compilations once so timed tests measure math, not
    compile time."""
    from nystrom_krr.kernels import KernelSpec, cross_gram, fourier_basis

    xs = np.linspace(0.0, 1.0, 4)
    fourier_basis(xs, 8)
    cross_gram(KernelSpec.gaussian(1.0), xs, xs)
    cross_gram(KernelSpec.laplacian(1.0), xs, xs)
    yield
