"""Probabilistic classifiers: Gaussian Bayes (BR) and kernel Bayes (KBR1, KBR2).

BR fits per-class Gaussian densities and applies Bayes' rule, so its outputs
are normalized probabilities. KBR1 (ridge regularization, parameters epsilon
and delta) and KBR2 (Moore-Penrose pseudoinverses) return the raw inner
products of class indicators with the posterior kernel mean: those values can
be negative or sum away from 1, and they are deliberately not clipped or
renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .embedding import (
    class_prior,
    kbr_weights,
    posterior_embedding_weights,
    posterior_operator_pinv,
    posterior_operator_ridge,
    prior_mean_vector,
)
from .kernels import DeltaKernel, GaussianKernel, gram_matrix, kernel_vector
from .numerics import SingularMatrixError

__all__ = [
    "DegenerateInputError",
    "LabeledSample",
    "GaussianClassStats",
    "PosteriorProbs",
    "fit_gaussian_stats",
    "gaussian_density",
    "br_posterior",
    "br_th_posterior",
    "indicator_matrix",
    "kbr1_posterior",
    "kbr2_posterior",
]


class DegenerateInputError(ValueError):
    """Every class density underflowed to zero at the query point."""


@dataclass(frozen=True)
class LabeledSample:
    """Paired (class label, feature vector) observations.

    ``labels`` is an integer vector of length n with values in [0, g);
    ``features`` is an (n, d) float matrix.
    """

    labels: np.ndarray
    features: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        if self.labels.ndim != 1:
            raise ValueError("labels must be a 1-d integer vector")
        if self.features.ndim != 2:
            raise ValueError("features must be an (n, d) matrix")
        if len(self.labels) != len(self.features):
            raise ValueError(
                f"{len(self.labels)} labels paired with {len(self.features)} feature rows"
            )
        if np.any(self.labels < 0):
            raise ValueError("labels must be nonnegative class indices")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class GaussianClassStats:
    """Per-class Gaussian parameters: means (g, d) and covariances (g, d, d)."""

    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "covariances", np.asarray(self.covariances, dtype=float))
        if self.means.ndim != 2:
            raise ValueError("means must be a (g, d) matrix")
        g, d = self.means.shape
        if self.covariances.shape != (g, d, d):
            raise ValueError(
                f"covariances must have shape ({g}, {d}, {d}), got {self.covariances.shape}"
            )

    @property
    def num_classes(self) -> int:
        return self.means.shape[0]


@dataclass(frozen=True)
class PosteriorProbs:
    """Per-class posterior values.

    ``normalized`` is True for BR outputs (entries in [0, 1] summing to 1)
    and False for KBR outputs (raw values, no range constraint).
    """

    values: np.ndarray
    normalized: bool

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1:
            raise ValueError("posterior values must be a 1-d vector")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("posterior values must be finite")
        if self.normalized:
            if np.any(self.values < 0) or np.any(self.values > 1):
                raise ValueError("normalized posterior entries must lie in [0, 1]")
            if abs(self.values.sum() - 1.0) > 1e-12:
                raise ValueError("normalized posterior must sum to 1")


def fit_gaussian_stats(sample: LabeledSample, num_classes: int | None = None) -> GaussianClassStats:
    """Per-class sample mean and covariance (n_j - 1 denominator).

    Every class must contribute at least d + 1 points and a nonsingular
    covariance; violations raise ValueError naming the class.
    """
    g = int(sample.labels.max()) + 1 if num_classes is None else num_classes
    d = sample.dim
    means = np.empty((g, d))
    covs = np.empty((g, d, d))
    for j in range(g):
        pts = sample.features[sample.labels == j]
        if len(pts) < d + 1:
            raise ValueError(
                f"class {j} has {len(pts)} points; need at least {d + 1} to fit a covariance"
            )
        means[j] = pts.mean(axis=0)
        covs[j] = np.cov(pts, rowvar=False, ddof=1)
        eigvals = np.linalg.eigvalsh(covs[j])
        if eigvals.min() <= 0:
            raise ValueError(
                f"class {j} has a singular covariance (smallest eigenvalue {eigvals.min():.3e})"
            )
    return GaussianClassStats(means=means, covariances=covs)


def gaussian_density(y, mean, cov) -> float:
    """Multivariate normal density at y; cov must be symmetric positive definite."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = len(mean)
    if y.shape != (d,) or cov.shape != (d, d):
        raise ValueError("y, mean, and cov dimensions disagree")
    if not np.allclose(cov, cov.T):
        raise ValueError("covariance must be symmetric")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance must be positive definite") from exc
    centered = scipy.linalg.solve_triangular(chol, y - mean, lower=True)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    log_pdf = -0.5 * (centered @ centered + d * math.log(2.0 * math.pi) + log_det)
    with np.errstate(under="ignore"):
        return float(math.exp(log_pdf)) if log_pdf > -745.0 else 0.0


def br_posterior(stats: GaussianClassStats, prior, y) -> PosteriorProbs:
    """Bayes' rule over fitted Gaussian class densities; normalized output.

    Raises :class:`DegenerateInputError` when every class density underflows
    to zero (y is astronomically far from all classes), so sweeps fail loudly
    instead of propagating NaN.
    """
    prior = _validated_prior(prior, stats.num_classes)
    likelihoods = np.array(
        [gaussian_density(y, stats.means[j], stats.covariances[j]) for j in range(stats.num_classes)]
    )
    joint = likelihoods * prior
    total = joint.sum()
    if total == 0.0:
        raise DegenerateInputError(
            "all class densities are numerically zero at the query point"
        )
    return PosteriorProbs(values=joint / total, normalized=True)


def br_th_posterior(class_means, class_covs, prior, y) -> PosteriorProbs:
    """BR evaluated at externally supplied (true) class parameters."""
    stats = GaussianClassStats(means=class_means, covariances=class_covs)
    return br_posterior(stats, prior, y)


def indicator_matrix(sample: LabeledSample, num_classes: int) -> np.ndarray:
    """Class-membership indicator matrix D of shape (g, n).

    ``D[i, j] == 1.0`` iff sample point j belongs to class i; every column
    sums to exactly 1.
    """
    if np.any(sample.labels >= num_classes):
        raise ValueError(
            f"labels reach {sample.labels.max()} but only {num_classes} classes declared"
        )
    return (np.arange(num_classes)[:, None] == sample.labels[None, :]).astype(float)


def kbr1_posterior(
    sample: LabeledSample,
    prior,
    y,
    sigma: float,
    epsilon: float,
    delta: float,
) -> PosteriorProbs:
    """Kernel Bayes posterior with ridge regularization; raw (unnormalized) output.

    Pipeline: delta-kernel Gram on labels, Gaussian Gram (bandwidth sigma) on
    features, prior mean vector, ridge weights at epsilon, ridge posterior
    operator at delta, then ``D @ R @ k_Y(y)``. Singularity failures carry the
    pipeline stage in their message.
    """
    prior = _validated_prior(prior, int(sample.labels.max()) + 1)
    g = len(prior)
    kx = DeltaKernel()
    ky_kernel = GaussianKernel(sigma)

    gx = gram_matrix(sample.labels, kx)
    gy = gram_matrix(sample.features, ky_kernel)
    m_pi = prior_mean_vector(class_prior(prior), sample.labels, kx)
    try:
        weights = kbr_weights(gx, m_pi, epsilon)
        op = posterior_operator_ridge(weights, gy, delta)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"kbr1: {exc}", exc.smallest_eigenvalue) from exc
    ky = kernel_vector(sample.features, y, ky_kernel)
    values = indicator_matrix(sample, g) @ posterior_embedding_weights(op, ky)
    return PosteriorProbs(values=values, normalized=False)


def kbr2_posterior(
    sample: LabeledSample,
    prior,
    y,
    sigma: float,
    pinv_rtol: float | None = None,
) -> PosteriorProbs:
    """Kernel Bayes posterior with Moore-Penrose pseudoinverses; raw output."""
    prior = _validated_prior(prior, int(sample.labels.max()) + 1)
    g = len(prior)
    kx = DeltaKernel()
    ky_kernel = GaussianKernel(sigma)

    gx = gram_matrix(sample.labels, kx)
    gy = gram_matrix(sample.features, ky_kernel)
    m_pi = prior_mean_vector(class_prior(prior), sample.labels, kx)
    op = posterior_operator_pinv(gx, m_pi, gy, pinv_rtol)
    ky = kernel_vector(sample.features, y, ky_kernel)
    values = indicator_matrix(sample, g) @ posterior_embedding_weights(op, ky)
    return PosteriorProbs(values=values, normalized=False)


def _validated_prior(prior, num_classes: int) -> np.ndarray:
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (num_classes,):
        raise ValueError(f"prior must have length {num_classes}, got shape {prior.shape}")
    if np.any(prior < 0):
        raise ValueError("prior entries must be nonnegative")
    if abs(prior.sum() - 1.0) > 1e-12:
        raise ValueError(f"prior must sum to 1 within 1e-12, got {prior.sum()!r}")
    return prior
