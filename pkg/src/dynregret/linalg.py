"""Dense symmetric/SPD primitives sized for desk-scale problems (n <= ~100).

Everything here is a pure function of its inputs: SPD solves via Cholesky
factorization (failure doubles as the positive-definiteness check),
eigenvalue extremes via full symmetric eigendecomposition, and the weighted
norm ||x||_A = sqrt(x'Ax). All reals are 64-bit floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    InvalidConstants,
    NegativeQuadraticForm,
    NotPositiveDefinite,
    NotSymmetric,
)

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class SpdBounds:
    """Spectral bracket [lambda_min, lambda_max] of an SPD matrix family."""

    lambda_min: float
    lambda_max: float

    def __post_init__(self):
        if not (self.lambda_min > 0.0 and np.isfinite(self.lambda_min)):
            raise NotPositiveDefinite(
                f"lambda_min must be positive, got {self.lambda_min}"
            )
        if not (self.lambda_max >= self.lambda_min and np.isfinite(self.lambda_max)):
            raise InvalidConstants(
                f"lambda_max={self.lambda_max} < lambda_min={self.lambda_min}"
            )

    @property
    def condition(self) -> float:
        return self.lambda_max / self.lambda_min

    def scaled(self, factor: float) -> "SpdBounds":
        if factor <= 0.0:
            raise InvalidConstants("scale factor must be positive")
        return SpdBounds(self.lambda_min * factor, self.lambda_max * factor)


def as_vector(x) -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidConstants("vector has non-finite entries")
    return v


def check_symmetric(A, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate a square symmetric matrix and return it as float64.

    Symmetry is required to within `rtol` relative to the max magnitude.
    """
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidConstants("matrix has non-finite entries")
    scale = np.max(np.abs(M))
    skew = np.max(np.abs(M - M.T))
    if skew > rtol * max(scale, 1.0):
        raise NotSymmetric(f"asymmetry {skew:.3e} exceeds tolerance at scale {scale:.3e}")
    return M


def spd_solve(A, b) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A via Cholesky.

    Raises NotPositiveDefinite when the factorization hits a non-positive
    pivot, which is the package's SPD check. Symmetry is the caller's
    invariant (enforced where matrices are constructed); only the lower
    triangle is read.
    """
    M = np.asarray(A, dtype=np.float64)
    v = np.asarray(b, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or v.ndim != 1 or M.shape[0] != v.size:
        raise DimensionMismatch(f"matrix is {M.shape}, vector has shape {v.shape}")
    try:
        factor = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return scipy.linalg.cho_solve(factor, v, check_finite=False)


def eig_extremes(A) -> SpdBounds:
    """Smallest and largest eigenvalue of a symmetric matrix.

    Returns an SpdBounds, so a symmetric matrix that is not positive
    definite surfaces as NotPositiveDefinite from the bounds invariant.
    """
    M = check_symmetric(A)
    evals = np.linalg.eigvalsh(M)
    return SpdBounds(float(evals[0]), float(evals[-1]))


def a_norm(x, A) -> float:
    """Weighted norm sqrt(x'Ax) for positive semidefinite A."""
    v = as_vector(x)
    M = check_symmetric(A)
    if M.shape[0] != v.size:
        raise DimensionMismatch(f"matrix is {M.shape}, vector has size {v.size}")
    q = float(v @ (M @ v))
    if q < -1e-12:
        raise NegativeQuadraticForm(f"x'Ax = {q:.3e} < 0; matrix is not PSD")
    return float(np.sqrt(max(q, 0.0)))
