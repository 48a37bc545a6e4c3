"""Regularized symmetric solves, eigenvalues, and operation counting.

The cost metric is a deterministic flop model rather than wall-clock: an
``n x m`` Gram-style product counts ``n * m**2``, an ``m x m`` factorization
counts ``m**3 / 3``, a triangular back-substitution ``m**2`` per right-hand
side. Wall-clock is reported separately by the experiment harness.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

logger = logging.getLogger(__name__)

# Factorization retry schedule: shift inflation factors 10**-j for
# j = 12, 10, 8, 6, 4, scaled by a conditioning guard (matrix diagonal
# magnitude over the shift). The fine initial levels matter: a barely
# indefinite PSD block only needs a round-off-scale repair, and a coarser
# first jitter is visible in downstream predictions at the 1e-8 level.
_JITTER_LEVELS = (0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4)


class NumericalError(RuntimeError):
    """Factorization or conditioning failure that jitter escalation cannot fix."""


@dataclass
class OpCount:
    """Accumulates flop estimates; counts only grow."""

    flops: int = 0
    _log: list = field(default_factory=list, repr=False)

    def add(self, amount: float, label: str = "") -> None:
        if amount < 0:
            raise ValueError("flop increments must be nonnegative")
        self.flops += int(amount)
        if label:
            self._log.append((label, int(amount)))

    def add_gram_product(self, n: int, m: int) -> None:
        self.add(n * m * m, "gram_product")

    def add_factorization(self, m: int) -> None:
        self.add(m**3 // 3, "factorization")

    def add_backsub(self, m: int, nrhs: int = 1) -> None:
        self.add(m * m * nrhs, "backsub")

    def merge(self, other: "OpCount") -> None:
        self.add(other.flops)


def _require_symmetric(a: np.ndarray, tol: float = 1e-10) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > tol * scale:
        raise ValueError("matrix is not symmetric within 1e-10 relative tolerance")


def cholesky_psd(a: np.ndarray, jitter_scale: float, opcount: OpCount | None = None):
    """Cholesky of a (nearly) PSD matrix with escalating diagonal jitter.

    ``jitter_scale`` sets the magnitude reference for the retry shifts; it is
    the regularization shift in the solvers below. Returns the upper factor.
    """
    m = a.shape[0]
    guard = max(1.0, float(np.abs(np.diagonal(a)).max()) / jitter_scale)
    for level in _JITTER_LEVELS:
        shifted = a if level == 0.0 else a + (jitter_scale * level * guard) * np.eye(m)
        try:
            factor = sla.cholesky(shifted, lower=False, check_finite=False)
        except sla.LinAlgError:
            continue
        if level > 0.0:
            logger.info(
                "cholesky needed jitter %.3e (scale %.3e, guard %.3e) on a %dx%d block",
                level * guard * jitter_scale,
                jitter_scale,
                guard,
                m,
                m,
            )
        if opcount is not None:
            opcount.add_factorization(m)
        return factor
    raise NumericalError(
        f"factorization failed for a {m}x{m} block even with jitter up to "
        f"{_JITTER_LEVELS[-1] * guard * jitter_scale:.3e}"
    )


def solve_psd(
    a: np.ndarray, b: np.ndarray, jitter_scale: float, opcount: OpCount | None = None
) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive (semi)definite ``a``."""
    factor = cholesky_psd(a, jitter_scale, opcount)
    x = sla.cho_solve((factor, False), b, check_finite=False)
    if opcount is not None:
        opcount.add_backsub(a.shape[0], 1 if b.ndim == 1 else b.shape[1])
    return x


def solve_regularized(
    a: np.ndarray, shift: float, b: np.ndarray, opcount: OpCount | None = None
) -> np.ndarray:
    """Solve ``(a + shift * I) x = b`` by symmetric factorization.

    ``a`` must be symmetric PSD up to round-off and ``shift`` strictly
    positive; near-singular cases fall back to jitter escalation.
    """
    if shift <= 0:
        raise ValueError(f"shift must be positive, got {shift}")
    _require_symmetric(a)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {a.shape}, rhs {b.shape}")
    return solve_psd(a + shift * np.eye(a.shape[0]), b, jitter_scale=shift, opcount=opcount)


def sym_eigenvalues(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, descending."""
    _require_symmetric(a)
    return np.linalg.eigvalsh(a)[::-1]


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("operator_norm needs finite entries")
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])
