"""Positive definite kernels and Gram matrix construction.

Two kernels are provided: a normalized Gaussian kernel on R^d with a single
shared bandwidth ``sigma`` (Euclidean norm, prefactor ``1/(sqrt(2*pi)*sigma)``)
and the delta kernel on a finite label set (1 on equal labels, 0 otherwise).
Gram matrices are built once and mirrored, so symmetry holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianKernel",
    "DeltaKernel",
    "GramMatrix",
    "gaussian_kernel",
    "delta_kernel",
    "gram_matrix",
    "kernel_vector",
]


def gaussian_kernel(x, y, sigma: float) -> float:
    """Evaluate the normalized Gaussian kernel at a pair of points.

    Parameters
    ----------
    x, y : array_like
        Vectors of equal dimension d >= 1.
    sigma : float
        Bandwidth, in the same units as the coordinates. Must be positive.

    Returns
    -------
    float
        ``(1 / (sqrt(2*pi) * sigma)) * exp(-||x - y||^2 / (2 * sigma^2))``.
        Underflow for distant points flushes to 0.0.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: x has shape {x.shape}, y has shape {y.shape}")
    sq_dist = float(np.sum((x - y) ** 2))
    return math.exp(-sq_dist / (2.0 * sigma**2)) / (math.sqrt(2.0 * math.pi) * sigma)


def delta_kernel(a, b) -> float:
    """Indicator kernel on a finite label set: 1.0 if ``a == b`` else 0.0."""
    return 1.0 if a == b else 0.0


@dataclass(frozen=True)
class GaussianKernel:
    """Normalized Gaussian kernel on R^d with shared bandwidth ``sigma``."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def __call__(self, x, y) -> float:
        return gaussian_kernel(x, y, self.sigma)

    def pairwise(self, xs, ys) -> np.ndarray:
        """Kernel evaluations between two point sets, shape (len(xs), len(ys))."""
        xs = _as_points(xs)
        ys = _as_points(ys)
        if xs.shape[1] != ys.shape[1]:
            raise ValueError(
                f"dimension mismatch: points of dim {xs.shape[1]} vs {ys.shape[1]}"
            )
        sq_dist = np.sum((xs[:, None, :] - ys[None, :, :]) ** 2, axis=-1)
        prefactor = 1.0 / (math.sqrt(2.0 * math.pi) * self.sigma)
        with np.errstate(under="ignore"):
            return prefactor * np.exp(-sq_dist / (2.0 * self.sigma**2))

    def describe(self) -> str:
        return f"gaussian(sigma={self.sigma!r})"


@dataclass(frozen=True)
class DeltaKernel:
    """Indicator kernel on a finite label set."""

    def __call__(self, a, b) -> float:
        return delta_kernel(a, b)

    def pairwise(self, a_labels, b_labels) -> np.ndarray:
        a = _as_labels(a_labels)
        b = _as_labels(b_labels)
        return (a[:, None] == b[None, :]).astype(float)

    def describe(self) -> str:
        return "delta"


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric matrix of pairwise kernel evaluations on one sample.

    ``entries[i, j] == k(points[i], points[j])``; symmetry is exact because the
    upper triangle is computed once and mirrored. The kernel that produced the
    matrix is kept alongside so downstream operators are self-describing.
    """

    entries: np.ndarray
    kernel: GaussianKernel | DeltaKernel

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {e.shape}")
        if not np.array_equal(e, e.T):
            raise ValueError("Gram matrix entries must be exactly symmetric")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def gram_matrix(points, kernel: GaussianKernel | DeltaKernel) -> GramMatrix:
    """Build the Gram matrix of ``kernel`` on ``points``.

    Points are feature vectors (n, d) for the Gaussian kernel, or integer
    labels (n,) for the delta kernel. An empty point list is rejected.
    """
    full = kernel.pairwise(points, points)
    if full.shape[0] == 0:
        raise ValueError("cannot build a Gram matrix from an empty point list")
    upper = np.triu(full)
    return GramMatrix(entries=upper + np.triu(full, 1).T, kernel=kernel)


def kernel_vector(points, query, kernel: GaussianKernel | DeltaKernel) -> np.ndarray:
    """Vector of kernel evaluations of every point against one query.

    Component i equals ``kernel(points[i], query)``.
    """
    if isinstance(kernel, DeltaKernel):
        return kernel.pairwise(points, [query])[:, 0]
    query = np.atleast_1d(np.asarray(query, dtype=float))
    return kernel.pairwise(points, query[None, :])[:, 0]


def _as_points(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    if xs.ndim != 2:
        raise ValueError(f"points must be a 1-d or 2-d array, got shape {xs.shape}")
    return xs


def _as_labels(labels) -> np.ndarray:
    a = np.asarray(labels)
    if a.ndim != 1:
        raise ValueError(f"labels must be a 1-d sequence, got shape {a.shape}")
    return a
