from typing import Tuple

import numpy as np
from scipy.linalg import lapack

from igeflow.core.errors import SingularMatrixError

SYMMETRY_TOL = 1e-12


def det_and_inverse(m: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Determinant and inverse of a symmetric positive definite matrix.

    Uses the LAPACK Cholesky factorization; a non-positive pivot raises
    ``SingularMatrixError`` naming the leading minor that failed.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")

    chol, info = lapack.dpotrf(m, lower=1, clean=1)
    if info > 0:
        raise SingularMatrixError(
            f"matrix is singular or indefinite: pivot {info - 1} is not positive",
            pivot=info - 1,
        )
    if info < 0:
        raise ValueError(f"invalid argument {-info} passed to dpotrf")

    diag = np.diag(chol)
    det = float(np.prod(diag) ** 2)
    inv_lower, info = lapack.dpotri(chol, lower=1)
    if info != 0:
        raise SingularMatrixError(
            f"inverse failed: pivot {info - 1} is zero", pivot=info - 1
        )
    inverse = np.tril(inv_lower) + np.tril(inv_lower, -1).T
    return det, inverse


def batch_sqrt_det(stack: np.ndarray) -> np.ndarray:
    """sqrt(det) of a stack of SPD matrices with shape (..., n, n)."""
    stack = np.asarray(stack, dtype=float)
    try:
        chol = np.linalg.cholesky(stack)
    except np.linalg.LinAlgError:
        # locate the offending matrix for a precise pivot diagnostic
        flat = stack.reshape((-1,) + stack.shape[-2:])
        for index, matrix in enumerate(flat):
            try:
                det_and_inverse(matrix)
            except SingularMatrixError as exc:
                raise SingularMatrixError(
                    f"matrix {index} of the batch: {exc.message}",
                    pivot=exc.pivot,
                    index=index,
                ) from exc
        raise
    return np.prod(np.diagonal(chol, axis1=-2, axis2=-1), axis=-1)
