"""Spectral quantities driving regularization and subsampling choices.

Everything here reduces to the eigenvalue sequence of the kernel integral
operator: effective dimensions, the a-priori regularization parameter
``lambda0`` solving ``N(lambda) = lambda * n``, the bound surrogate ``theta``,
Tikhonov filter factors with their qualification margins, and smoothness
(index) functions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .kernels import DecaySpec, KernelSpec, fourier_basis, gram, kappa
from .linalg import NumericalError, cholesky_psd, sym_eigenvalues

LOG_DOMAIN_CAP = math.exp(-1.0)


@dataclass(frozen=True)
class SpectralProfile:
    """Descending nonnegative eigenvalue sequence of the integral operator.

    ``source`` records provenance: "analytic" profiles come from a designed
    kernel's decay rule, "empirical" ones from Gram eigenvalues of K/n.
    """

    eigenvalues: np.ndarray
    source: str
    decay: DecaySpec | None = None
    truncation: int | None = None

    def __post_init__(self):
        eig = np.asarray(self.eigenvalues, dtype=np.float64)
        if eig.ndim != 1 or eig.size == 0:
            raise ValueError("profile needs a nonempty eigenvalue vector")
        if eig.min() < 0:
            raise ValueError("profile eigenvalues must be nonnegative")
        if np.any(np.diff(eig) > 0):
            raise ValueError("profile eigenvalues must be descending")
        object.__setattr__(self, "eigenvalues", eig)

    @property
    def top(self) -> float:
        """Surrogate for the operator norm of the integral operator."""
        return float(self.eigenvalues[0])


def analytic_profile(decay: DecaySpec, truncation: int) -> SpectralProfile:
    return SpectralProfile(
        decay.eigenvalues(truncation), "analytic", decay=decay, truncation=truncation
    )


def empirical_profile(kernel: KernelSpec, xs) -> SpectralProfile:
    """Eigenvalues of K/n from a training sample.

    For designed kernels the nonzero spectrum of K/n equals that of the
    (truncation x truncation) weighted second-moment matrix, which is much
    cheaper than an n x n decomposition; both routes agree and the small-n
    tests cross-check them.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    n = xs.size
    if n == 0:
        raise ValueError("empirical profile needs at least one sample")
    if kernel.is_designed and n > kernel.truncation:
        mu = kernel.eigenvalues()
        basis = fourier_basis(xs, kernel.truncation)
        second_moment = (basis.T @ basis) / n
        root = np.sqrt(mu)
        eig = np.linalg.eigvalsh(root[:, None] * second_moment * root[None, :])[::-1]
    else:
        eig = sym_eigenvalues(gram(kernel, xs) / n)
    return SpectralProfile(np.clip(eig, 0.0, None), "empirical")


def profile_to_csv(profile: SpectralProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for i, val in enumerate(profile.eigenvalues, start=1):
            writer.writerow([i, repr(float(val))])


# ---------------------------------------------------------------------------
# index functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexFunction:
    """Smoothness function phi: Hoelder ``t**r`` or logarithmic ``log(1/t)**-r``.

    The logarithmic family is only meaningful for ``t <= 1/e``; it is extended
    by its value 1 above that cap, which is harmless for the spectra in scope
    (top eigenvalues of order one, phi only ever multiplies bounds).
    """

    family: str
    r: float

    def __post_init__(self):
        if self.family == "holder":
            if not 0.0 < self.r <= 0.5:
                raise ValueError(f"holder exponent must be in (0, 1/2], got {self.r}")
        elif self.family == "log_type":
            if not 0.0 < self.r <= 1.0:
                raise ValueError(f"log_type exponent must be in (0, 1], got {self.r}")
        else:
            raise ValueError(f"unknown index function family: {self.family!r}")

    @classmethod
    def holder(cls, r: float) -> "IndexFunction":
        return cls("holder", r)

    @classmethod
    def log_type(cls, r: float) -> "IndexFunction":
        return cls("log_type", r)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < 0):
            raise ValueError("index functions are defined for t >= 0")
        if self.family == "holder":
            out = t**self.r
        else:
            capped = np.minimum(t, LOG_DOMAIN_CAP)
            with np.errstate(divide="ignore"):
                out = np.where(capped > 0.0, np.log(1.0 / capped) ** (-self.r), 0.0)
        return float(out) if out.ndim == 0 else out

    def is_admissible(self, grid_size: int = 400) -> bool:
        """Check sqrt(t)/phi(t) is nondecreasing (the low-smoothness regime)."""
        t = np.logspace(-12, 0, grid_size)
        ratio = np.sqrt(t) / self(t)
        return bool(np.all(np.diff(ratio) >= -1e-12 * ratio[:-1]))


# ---------------------------------------------------------------------------
# effective dimensions
# ---------------------------------------------------------------------------


def effective_dimension(profile: SpectralProfile, lam: float) -> float:
    """N(lambda) = sum_k sigma_k / (sigma_k + lambda)."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    sig = profile.eigenvalues
    return float(np.sum(sig / (sig + lam)))


def nx_empirical(kernel: KernelSpec, training_xs, x: float, lam: float) -> float:
    """Pointwise effective dimension with the empirical covariance plug-in.

    Woodbury reduction: ``(K(x,x) - k_x^T (lam I + K/n)^{-1} k_x / n) / lam``
    with ``k_x = (K(x, x_i))_i``.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    xs = np.atleast_1d(np.asarray(training_xs, dtype=np.float64))
    n = xs.size
    from .kernels import cross_gram, eval_kernel

    k_x = cross_gram(kernel, xs, [x])[:, 0]
    big_k = gram(kernel, xs)
    solved = _solve_shifted_gram(big_k, n, lam, k_x)
    val = (eval_kernel(kernel, x, x) - k_x @ solved / n) / lam
    return _check_nx(val, kernel, lam)


def _solve_shifted_gram(big_k, n, lam, rhs):
    m = big_k.shape[0]
    factor = cholesky_psd(big_k / n + lam * np.eye(m), jitter_scale=lam)
    return sla.cho_solve((factor, False), rhs, check_finite=False)


def _check_nx(val, kernel, lam):
    if val < -1e-8 * kappa(kernel) / lam:
        raise NumericalError(f"pointwise effective dimension came out negative: {val}")
    return max(float(val), 0.0)


def nx_empirical_training(kernel: KernelSpec, training_xs, lam: float) -> np.ndarray:
    """Empirical N_x(lambda) at every training point (vectorized)."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    xs = np.atleast_1d(np.asarray(training_xs, dtype=np.float64))
    n = xs.size
    big_k = gram(kernel, xs)
    solved = _solve_shifted_gram(big_k, n, lam, big_k)
    quad = np.einsum("ij,ji->i", big_k, solved) / n
    vals = (np.diagonal(big_k) - quad) / lam
    bound = 1e-8 * kappa(kernel) / lam
    if vals.min() < -bound:
        raise NumericalError(
            f"pointwise effective dimension came out negative: {vals.min()}"
        )
    return np.clip(vals, 0.0, None)


def nx_analytic(kernel: KernelSpec, xs, lam: float) -> np.ndarray:
    """Exact N_x(lambda) for designed kernels, via the eigenbasis."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if not kernel.is_designed:
        raise ValueError("analytic pointwise effective dimension needs a designed kernel")
    mu = kernel.eigenvalues()
    basis = fourier_basis(xs, kernel.truncation)
    return (basis * basis) @ (mu / (mu + lam))


def n_infinity(source, lam: float, grid_size: int = 512, xs=None) -> float:
    """sup_x N_x(lambda), by grid maximization.

    * designed kernel (or analytic profile carrying its decay): exact basis
      formula on a uniform grid over [0, 1] -- the sup sits at x = 0, which
      the grid contains;
    * closed-form kernel: empirical plug-in maximized over the training
      points ``xs`` (the population sup is unavailable without the measure).

    Always bounded by kappa / lambda.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if isinstance(source, SpectralProfile):
        if source.decay is None or source.truncation is None:
            raise ValueError("profile-based n_infinity needs an analytic profile")
        source = KernelSpec.designed(source.decay.s, source.truncation)
    if source.is_designed:
        grid = np.linspace(0.0, 1.0, grid_size)
        return float(nx_analytic(source, grid, lam).max())
    if xs is None:
        raise ValueError("n_infinity for closed-form kernels needs training points")
    return float(nx_empirical_training(source, xs, lam).max())


def lambda0(profile: SpectralProfile, n: int) -> float:
    """The unique root of ``N(lambda) = lambda * n``.

    N is decreasing and ``lambda * n`` increasing, so bisection on a bracket
    is exact; the upper end starts at the top eigenvalue and doubles in the
    rare small-n case where the root sits above it.
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if profile.top <= 0.0:
        raise ValueError("degenerate operator: no positive eigenvalue, no root")
    lo, hi = 1e-16, profile.top
    doublings = 0
    while effective_dimension(profile, hi) > hi * n:
        hi *= 2.0
        doublings += 1
        if doublings > 64:
            raise NumericalError("failed to bracket the lambda0 root")
    while (hi - lo) > 1e-12 * hi:
        mid = math.sqrt(lo * hi)
        if effective_dimension(profile, mid) > mid * n:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def theta(phi: IndexFunction, profile: SpectralProfile, n: int, lam: float) -> float:
    """The lambda-dependent bound factor phi(lam) (1 + sqrt(N(lam)/(n lam)))."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return float(phi(lam) * (1.0 + math.sqrt(effective_dimension(profile, lam) / (n * lam))))


# ---------------------------------------------------------------------------
# filters and qualification
# ---------------------------------------------------------------------------


def filters(lam: float, t):
    """Tikhonov filter pair: g = 1/(t + lam), residual r = lam/(t + lam)."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("filter argument t must be nonnegative")
    g = 1.0 / (t + lam)
    r = lam / (t + lam)
    if t.ndim == 0:
        return float(g), float(r)
    return g, r


def qualification_margin(phi: IndexFunction, lam: float, q: float, t_grid) -> float:
    """max over the grid of r_lam(t) t^q phi(t) / (lam^q phi(lam)).

    The margin stays <= 1 at q = 0 and <= 2 for q in (0, 1/2] for the
    admissible families here.
    """
    if not 0.0 <= q <= 0.5:
        raise ValueError(f"q must lie in [0, 1/2], got {q}")
    t = np.asarray(t_grid, dtype=np.float64)
    if np.any(t <= 0):
        raise ValueError("qualification grid must be strictly positive")
    _, resid = filters(lam, t)
    numer = resid * t**q * phi(t)
    denom = lam**q * phi(lam)
    return float(numer.max() / denom)


def holder_perturbation_check(r: float, a: float, b: float) -> bool:
    """Scalar Hoelder perturbation inequality |a^r - b^r| <= |a - b|^r."""
    if not 0.0 < r <= 0.5:
        raise ValueError(f"holder exponent must be in (0, 1/2], got {r}")
    if a < 0 or b < 0:
        raise ValueError("holder_perturbation_check needs nonnegative arguments")
    return abs(a**r - b**r) <= abs(a - b) ** r + 1e-15


# ---------------------------------------------------------------------------
# kernel source-condition constant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CGammaBound:
    """Grid supremum and analytic envelope for the size-rule constant."""

    c_gamma: float
    upper_bound: float
    gamma: float


def c_gamma_for_designed(
    decay: DecaySpec, truncation: int, gamma: float, grid_size: int = 4096
) -> CGammaBound:
    """Size-rule constant ``c_gamma = sup_x sqrt(sum_k mu_k^(2-gamma) e_k(x)^2)``.

    The grid contains x = 0, where the supremum is attained (every weight is
    maximized there), so the grid value is exact; the analytic envelope
    ``sqrt(2 sum_k mu_k^(2-gamma))`` uses ``e_k^2 <= 2``.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    if (2.0 - gamma) / decay.s <= 1.0:
        raise ValueError(
            "divergent coefficient series: needs gamma < 2 - s "
            f"(gamma={gamma}, s={decay.s})"
        )
    mu_pow = decay.eigenvalues(truncation) ** (2.0 - gamma)
    grid = np.linspace(0.0, 1.0, grid_size)
    basis = fourier_basis(grid, truncation)
    sup_sq = float(((basis * basis) @ mu_pow).max())
    return CGammaBound(
        c_gamma=math.sqrt(sup_sq),
        upper_bound=math.sqrt(2.0 * float(mu_pow.sum())),
        gamma=gamma,
    )


def n_infinity_gamma_bound(c_gamma: float, gamma: float, lam: float) -> float:
    """Power-type envelope ``c_gamma**2 * lam**(gamma - 1)`` for N_infinity."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return c_gamma**2 * lam ** (gamma - 1.0)
