"""Full-data kernel ridge regression baseline.

Minimizes the regularized empirical risk
``mean((f(x_i) - y_i)^2) + lam * ||f||_H^2`` over the RKHS; by the representer
theorem the coefficients solve ``(K + lam * n * I) c = y``. Note the ``n``
factor: it comes from the 1/n weighting of the data-fit term, so ``lam``
matches the population-scaled spectral quantities used elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, cross_gram, gram
from .linalg import OpCount, solve_regularized


@dataclass
class KrrModel:
    training_xs: np.ndarray
    coefficients: np.ndarray
    lam: float
    opcount: OpCount = field(default_factory=OpCount)


def fit_krr(kernel: KernelSpec, data, lam: float) -> KrrModel:
    """Fit by solving the n x n shifted Gram system."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    xs = np.atleast_1d(np.asarray(data.xs, dtype=np.float64))
    ys = np.atleast_1d(np.asarray(data.ys, dtype=np.float64))
    if xs.size == 0:
        raise ValueError("need at least one training point")
    if xs.shape != ys.shape:
        raise ValueError(f"xs/ys length mismatch: {xs.shape} vs {ys.shape}")
    ops = OpCount()
    coeff = solve_regularized(gram(kernel, xs), lam * xs.size, ys, opcount=ops)
    return KrrModel(training_xs=xs, coefficients=coeff, lam=lam, opcount=ops)


def predict(model: KrrModel, kernel: KernelSpec, xs) -> np.ndarray:
    """Evaluate f(x) = sum_i c_i K(x, x_i)."""
    return cross_gram(kernel, xs, model.training_xs) @ model.coefficients


def _support(model):
    """(support points, coefficients) for either model flavor."""
    if hasattr(model, "inducing_indices"):
        return model.inducing_xs, model.alpha
    return model.training_xs, model.coefficients


def empirical_risk(model, kernel: KernelSpec, data, lam: float) -> float:
    """Regularized empirical risk of a fitted model on its training data.

    Works for both full-KRR and Nystrom models; the RKHS-norm term is
    ``c^T K_ss c`` over the model's support points.
    """
    xs = np.atleast_1d(np.asarray(data.xs, dtype=np.float64))
    ys = np.atleast_1d(np.asarray(data.ys, dtype=np.float64))
    support, coeff = _support(model)
    preds = cross_gram(kernel, xs, support) @ coeff
    fit_term = float(np.mean((preds - ys) ** 2))
    rkhs_sq = float(coeff @ (gram(kernel, support) @ coeff))
    return fit_term + lam * rkhs_sq
