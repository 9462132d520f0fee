"""Dense linear-algebra primitives for small (n <= a few hundred) systems.

Ridge-regularized symmetric solves, an SVD-based Moore-Penrose pseudoinverse
with an explicit relative rank cutoff, and singular-value diagnostics. All
matrices are dense float64; no sparsity or blocking is attempted at the
problem sizes this package targets.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "SingularMatrixError",
    "solve_ridge",
    "pseudo_inverse",
    "singular_values",
    "default_pinv_rtol",
]


class SingularMatrixError(np.linalg.LinAlgError):
    """A solve hit a numerically singular matrix.

    Carries ``smallest_eigenvalue``, the offending smallest-magnitude
    eigenvalue (or singular value) estimate, when one is available.
    """

    def __init__(self, message: str, smallest_eigenvalue: float | None = None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


def solve_ridge(A, b, rho: float) -> np.ndarray:
    """Solve ``(A + rho * I) x = b`` for symmetric A.

    Uses a Cholesky factorization when ``A + rho * I`` is positive definite
    (the common case: A is a PSD Gram matrix and rho > 0) and falls back to a
    symmetric eigendecomposition otherwise, so rho = 0 on indefinite or
    semidefinite input still gets an exact solve or a clean error.

    Raises
    ------
    ValueError
        If A is not square/symmetric, shapes disagree, or rho < 0.
    SingularMatrixError
        If ``A + rho * I`` is numerically singular (smallest |eigenvalue|
        at or below 1e-14 times the largest).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if not np.allclose(A, A.T):
        raise ValueError("A must be symmetric")
    if b.shape != (A.shape[0],):
        raise ValueError(f"b must have length {A.shape[0]}, got shape {b.shape}")
    if rho < 0:
        raise ValueError(f"ridge term must be nonnegative, got {rho}")

    M = A + rho * np.eye(A.shape[0])
    try:
        factor = scipy.linalg.cho_factor(M, lower=True)
        return scipy.linalg.cho_solve(factor, b)
    except scipy.linalg.LinAlgError:
        pass

    w, V = np.linalg.eigh(M)
    abs_w = np.abs(w)
    largest = abs_w.max()
    smallest = abs_w.min()
    if largest == 0.0 or smallest <= 1e-14 * largest:
        raise SingularMatrixError(
            f"ridge system is numerically singular "
            f"(smallest |eigenvalue| {smallest:.3e}, largest {largest:.3e})",
            smallest_eigenvalue=smallest,
        )
    return V @ ((V.T @ b) / w)


def pseudo_inverse(A, rel_tolerance: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via full SVD with a relative rank cutoff.

    Singular values at or below ``rel_tolerance * s_max`` are treated as zero.
    The default cutoff is ``1e-12 * max(m, n)``, recorded by callers that
    persist results so the numerical rank convention is reproducible.

    Always succeeds; the zero matrix maps to the zero matrix.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"A must be a 2-d matrix, got shape {A.shape}")
    m, n = A.shape
    if rel_tolerance is None:
        rel_tolerance = default_pinv_rtol(m, n)
    if not 0.0 < rel_tolerance < 1.0:
        raise ValueError(f"rel_tolerance must lie in (0, 1), got {rel_tolerance}")

    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, m))
    keep = s > rel_tolerance * s[0]
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (Vt.T * s_inv) @ U.T


def singular_values(A) -> np.ndarray:
    """Singular values of A, nonnegative and sorted nonincreasing."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"A must be a 2-d matrix, got shape {A.shape}")
    return np.linalg.svd(A, compute_uv=False)


def default_pinv_rtol(m: int, n: int) -> float:
    """Default relative singular-value cutoff for ``pseudo_inverse``."""
    return 1e-12 * max(m, n)
