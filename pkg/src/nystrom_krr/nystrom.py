"""Plain Nystrom subsampling for kernel ridge regression.

Inducing points are drawn uniformly without replacement from the training
set; the estimator is the risk minimizer restricted to the span of their
kernel sections. With ``K_nm`` the training-by-inducing Gram block and
``K_mm`` the inducing Gram, the coefficients solve

    (K_nm^T K_nm + lam * n * K_mm) alpha = K_nm^T y.

The solve substitutes the Cholesky factor of ``K_mm`` (``K_mm = R^T R``,
``beta = R alpha``), which turns the system into a shifted SPD one,
``(G^T G + lam * n * I) beta = G^T y`` with ``G = K_nm R^{-1}``. That avoids
squaring the conditioning of the plain normal equations while solving exactly
the same system; near-singular ``K_mm`` blocks (duplicate input values) are
handled by jitter escalation on the ``K_mm`` factorization.

Cost: Theta(n m^2) for the products plus Theta(m^3) for factorizations,
recorded in the model's OpCount.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .kernels import KernelSpec, cross_gram, gram
from .linalg import OpCount, cholesky_psd
from .spectral import SpectralProfile, n_infinity


@dataclass
class NystromModel:
    inducing_indices: np.ndarray
    inducing_xs: np.ndarray
    alpha: np.ndarray
    lam: float
    opcount: OpCount = field(default_factory=OpCount)


@dataclass(frozen=True)
class SizeRuleParams:
    """Constants of the subsample-size rule.

    ``c`` is the generic rule constant (the theory leaves it unspecified);
    ``delta`` the confidence level; ``gamma``/``c_gamma``, when both given,
    switch the rule to the power-type envelope ``c_gamma^2 lam^(gamma-1)``
    instead of a computed sup.
    """

    c: float = 1.0
    delta: float = 0.1
    gamma: float | None = None
    c_gamma: float | None = None

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"rule constant c must be positive, got {self.c}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")


def subsample_plain(n: int, m: int, seed: int) -> np.ndarray:
    """m distinct indices, uniform over size-m subsets, deterministic per seed."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    return rng.choice(n, size=m, replace=False)


def fit_nystrom(kernel: KernelSpec, data, lam: float, inducing_indices) -> NystromModel:
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    xs = np.atleast_1d(np.asarray(data.xs, dtype=np.float64))
    ys = np.atleast_1d(np.asarray(data.ys, dtype=np.float64))
    idx = np.asarray(inducing_indices, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("need at least one inducing index")
    if np.unique(idx).size != idx.size:
        raise ValueError("inducing indices must be distinct")
    if idx.min() < 0 or idx.max() >= xs.size:
        raise ValueError("inducing indices out of range")

    n, m = xs.size, idx.size
    x_ind = xs[idx]
    ops = OpCount()
    k_nm = cross_gram(kernel, xs, x_ind)
    k_mm = gram(kernel, x_ind)

    shift = lam * n
    r_factor = cholesky_psd(k_mm, jitter_scale=shift, opcount=ops)
    g_mat = sla.solve_triangular(r_factor, k_nm.T, lower=False, trans="T").T
    reduced = g_mat.T @ g_mat + shift * np.eye(m)
    ops.add_gram_product(n, m)
    beta_factor = cholesky_psd(reduced, jitter_scale=shift, opcount=ops)
    beta = sla.cho_solve((beta_factor, False), g_mat.T @ ys, check_finite=False)
    alpha = sla.solve_triangular(r_factor, beta, lower=False)
    ops.add_backsub(m)

    return NystromModel(
        inducing_indices=idx, inducing_xs=x_ind, alpha=alpha, lam=lam, opcount=ops
    )


def predict(model: NystromModel, kernel: KernelSpec, xs) -> np.ndarray:
    return cross_gram(kernel, xs, model.inducing_xs) @ model.alpha


def subsample_size(
    n: int,
    lam: float,
    params: SizeRuleParams,
    kernel: KernelSpec | None = None,
    xs=None,
    profile: SpectralProfile | None = None,
) -> int:
    """Subsample size ``min(n, ceil(c * N_inf(lam) * log(1/lam) * log(1/delta)))``.

    ``N_inf`` comes from, in order of preference: the ``gamma`` envelope when
    ``params`` carries (gamma, c_gamma); the exact basis formula for designed
    kernels (or analytic profiles); the empirical plug-in maximized over the
    training points otherwise.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"size rule needs lambda in (0, 1), got {lam}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if params.gamma is not None and params.c_gamma is not None:
        n_inf = params.c_gamma**2 * lam ** (params.gamma - 1.0)
    elif profile is not None or (kernel is not None and kernel.is_designed):
        n_inf = n_infinity(profile if profile is not None else kernel, lam)
    elif kernel is not None and xs is not None:
        n_inf = n_infinity(kernel, lam, xs=xs)
    else:
        raise ValueError(
            "subsample_size needs (gamma, c_gamma), a designed kernel/profile, "
            "or a kernel with training points"
        )
    raw = math.ceil(params.c * n_inf * math.log(1.0 / lam) * math.log(1.0 / params.delta))
    return max(1, min(n, raw))


def lambda_admissible(
    lam: float, n: int, delta: float, operator_norm_bound: float, c: float = 1.0
) -> bool:
    """Whether lam sits in [c log(n/delta)/n, operator_norm_bound]."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    lower = c * math.log(n / delta) / n
    return lower <= lam <= operator_norm_bound


def save_model(model: NystromModel, path) -> None:
    """Self-describing text artifact: indices, inducing points, alpha, lambda."""
    payload = {
        "format": "nystrom-krr-model",
        "version": 1,
        "lambda": model.lam,
        "inducing_indices": model.inducing_indices.tolist(),
        "inducing_xs": model.inducing_xs.tolist(),
        "alpha": model.alpha.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_model(path) -> NystromModel:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != "nystrom-krr-model":
        raise ValueError(f"{path} is not a saved model artifact")
    return NystromModel(
        inducing_indices=np.asarray(payload["inducing_indices"], dtype=np.int64),
        inducing_xs=np.asarray(payload["inducing_xs"], dtype=np.float64),
        alpha=np.asarray(payload["alpha"], dtype=np.float64),
        lam=float(payload["lambda"]),
    )
