"""Kernel-mean machinery: prior mean vectors, posterior operators, expectations.

The pipeline implemented here turns a weighted prior sample and a paired
training sample into an n x n posterior operator acting on kernel vectors:

1. ``prior_mean_vector`` evaluates the prior kernel mean at the n training
   anchors, giving the vector ``m_pi``.
2. ``kbr_weights`` solves ``(G_X + n * epsilon * I) mu = m_pi``; note the
   ridge term is ``n * epsilon``, not ``epsilon``.
3. ``posterior_operator_ridge`` builds
   ``R = Lam @ G_Y @ inv((Lam @ G_Y)^2 + delta * I) @ Lam`` with
   ``Lam = diag(mu)``, or ``posterior_operator_pinv`` builds the
   pseudoinverse variant ``R' = pinv(Lam' @ G_Y) @ Lam'`` with
   ``Lam' = diag(pinv(G_X) @ m_pi)``.
4. ``posterior_expectation`` / ``posterior_embedding_weights`` evaluate
   ``f_X^T R k_Y(y)`` and ``R k_Y(y)``.

Posterior weights are reported raw: they can be negative or sum away from 1,
and the experiment layer depends on observing that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .kernels import DeltaKernel, GaussianKernel, GramMatrix
from .numerics import SingularMatrixError, default_pinv_rtol, pseudo_inverse, singular_values, solve_ridge

__all__ = [
    "PriorMixture",
    "KbrWeights",
    "PosteriorOperator",
    "class_prior",
    "prior_mean_vector",
    "kbr_weights",
    "posterior_operator_ridge",
    "posterior_operator_pinv",
    "posterior_expectation",
    "posterior_embedding_weights",
    "conditional_embedding_weights",
]


@dataclass(frozen=True)
class PriorMixture:
    """Weighted atoms representing a prior's kernel mean.

    ``weights`` has length l >= 1 and pairs with ``atoms`` (labels for the
    delta kernel, feature vectors for the Gaussian kernel). General use puts
    no constraint on the weights; classification priors should be built with
    :func:`class_prior`, which enforces a probability vector.
    """

    weights: np.ndarray
    atoms: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "atoms", np.asarray(self.atoms))
        if self.weights.ndim != 1 or len(self.weights) == 0:
            raise ValueError("weights must be a nonempty 1-d vector")
        if len(self.atoms) != len(self.weights):
            raise ValueError(
                f"{len(self.weights)} weights paired with {len(self.atoms)} atoms"
            )
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")


def class_prior(probabilities) -> PriorMixture:
    """Prior over class labels 0..g-1 as a PriorMixture.

    ``probabilities`` must be nonnegative and sum to 1 within 1e-12.
    """
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise ValueError("class prior must be a nonempty 1-d probability vector")
    if np.any(p < 0):
        raise ValueError("class prior entries must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"class prior must sum to 1, got {p.sum()!r}")
    return PriorMixture(weights=p, atoms=np.arange(len(p)))


@dataclass(frozen=True)
class KbrWeights:
    """Solution ``mu`` of the prior-weight system, with its ridge provenance."""

    mu: np.ndarray
    epsilon: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        if self.mu.shape != (self.n,):
            raise ValueError(f"mu must have length n={self.n}, got shape {self.mu.shape}")
        if not np.all(np.isfinite(self.mu)):
            raise ValueError("mu entries must be finite")


@dataclass(frozen=True)
class PosteriorOperator:
    """An n x n posterior operator plus the provenance that produced it.

    ``method`` is ``"ridge"`` or ``"pinv"``; ``provenance`` records the
    regularization/tolerance parameters so emitted results stay
    self-describing.
    """

    matrix: np.ndarray
    method: str
    provenance: dict[str, Any]

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator matrix entries must be finite")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def prior_mean_vector(
    prior: PriorMixture, anchors, kernel: GaussianKernel | DeltaKernel
) -> np.ndarray:
    """Evaluate the prior kernel mean at each anchor point.

    Component i is ``sum_j weights[j] * kernel(anchors[i], atoms[j])``.
    """
    cross = kernel.pairwise(anchors, prior.atoms)
    return cross @ prior.weights


def kbr_weights(gx: GramMatrix, m_pi, epsilon: float) -> KbrWeights:
    """Solve ``(G_X + n * epsilon * I) mu = m_pi``.

    The ridge term scales with the sample size n. ``epsilon`` may be zero, in
    which case a singular G_X surfaces as :class:`SingularMatrixError`.
    """
    m_pi = np.asarray(m_pi, dtype=float)
    n = gx.n
    if m_pi.shape != (n,):
        raise ValueError(f"m_pi must have length {n}, got shape {m_pi.shape}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    try:
        mu = solve_ridge(gx.entries, m_pi, n * epsilon)
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            f"prior weight solve failed: {exc}", exc.smallest_eigenvalue
        ) from exc
    return KbrWeights(mu=mu, epsilon=epsilon, n=n)


def posterior_operator_ridge(
    weights: KbrWeights, gy: GramMatrix, delta: float
) -> PosteriorOperator:
    """Ridge-form posterior operator ``Lam G_Y ((Lam G_Y)^2 + delta I)^-1 Lam``.

    ``Lam = diag(mu)``. The inner system is nonsymmetric, so a general LU
    solve is used. ``delta = 0`` is permitted and raises
    :class:`SingularMatrixError` when ``Lam @ G_Y`` is numerically singular
    rather than being silently regularized.
    """
    n = weights.n
    if gy.n != n:
        raise ValueError(f"G_Y is {gy.n} x {gy.n} but weights have n={n}")
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")

    lam_gy = weights.mu[:, None] * gy.entries
    M = lam_gy @ lam_gy + delta * np.eye(n)
    if delta == 0.0:
        sv = singular_values(M)
        if sv[0] == 0.0 or sv[-1] <= 1e-14 * sv[0]:
            raise SingularMatrixError(
                "posterior operator solve failed: (Lam G_Y)^2 is numerically "
                f"singular at delta=0 (smallest singular value {sv[-1]:.3e})",
                smallest_eigenvalue=sv[-1],
            )
    try:
        inv_applied = np.linalg.solve(M, np.diag(weights.mu))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            f"posterior operator solve failed: {exc}"
        ) from exc
    return PosteriorOperator(
        matrix=lam_gy @ inv_applied,
        method="ridge",
        provenance={"epsilon": weights.epsilon, "delta": delta},
    )


def posterior_operator_pinv(
    gx: GramMatrix, m_pi, gy: GramMatrix, rel_tolerance: float | None = None
) -> PosteriorOperator:
    """Pseudoinverse-form posterior operator ``pinv(Lam' G_Y) Lam'``.

    ``Lam' = diag(pinv(G_X) @ m_pi)``. Total: no regularization parameter and
    no failure mode beyond shape validation; rank decisions are made by the
    relative singular-value cutoff (defaulting to the numerics default).
    """
    m_pi = np.asarray(m_pi, dtype=float)
    n = gx.n
    if m_pi.shape != (n,):
        raise ValueError(f"m_pi must have length {n}, got shape {m_pi.shape}")
    if gy.n != n:
        raise ValueError(f"G_Y is {gy.n} x {gy.n} but G_X is {n} x {n}")
    if rel_tolerance is None:
        rel_tolerance = default_pinv_rtol(n, n)

    mu_prime = pseudo_inverse(gx.entries, rel_tolerance) @ m_pi
    lam_gy = mu_prime[:, None] * gy.entries
    matrix = pseudo_inverse(lam_gy, rel_tolerance) @ np.diag(mu_prime)
    return PosteriorOperator(
        matrix=matrix,
        method="pinv",
        provenance={"pinv_rtol": rel_tolerance},
    )


def posterior_expectation(f_values, op: PosteriorOperator, ky_at_y) -> float:
    """Posterior expectation ``f_values^T @ op.matrix @ ky_at_y``.

    ``f_values`` holds the function evaluated at the n training inputs and
    ``ky_at_y`` the kernel vector of the conditioning observation.
    """
    f_values = np.asarray(f_values, dtype=float)
    n = op.n
    if f_values.shape != (n,):
        raise ValueError(f"f_values must have length {n}, got shape {f_values.shape}")
    return float(f_values @ posterior_embedding_weights(op, ky_at_y))


def posterior_embedding_weights(op: PosteriorOperator, ky_at_y) -> np.ndarray:
    """Coefficient vector ``op.matrix @ ky_at_y`` of the posterior mean.

    The posterior kernel mean is ``sum_i w_i * k_X(., X_i)`` with the returned
    ``w``; pairing ``w`` with function values reproduces
    :func:`posterior_expectation` exactly.
    """
    ky_at_y = np.asarray(ky_at_y, dtype=float)
    if ky_at_y.shape != (op.n,):
        raise ValueError(f"ky_at_y must have length {op.n}, got shape {ky_at_y.shape}")
    return op.matrix @ ky_at_y


def conditional_embedding_weights(gx: GramMatrix, kx_at_x, epsilon: float) -> np.ndarray:
    """Weights of the ridge-regularized conditional embedding given X = x.

    Returns ``w = (G_X + n * epsilon * I)^-1 k_X(x)``; the embedding of Y
    given X = x is then ``sum_i w_i * k_Y(., Y_i)``. Requires epsilon > 0,
    which makes the solve nonsingular for any PSD G_X.
    """
    kx_at_x = np.asarray(kx_at_x, dtype=float)
    if kx_at_x.shape != (gx.n,):
        raise ValueError(f"kx_at_x must have length {gx.n}, got shape {kx_at_x.shape}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return solve_ridge(gx.entries, kx_at_x, gx.n * epsilon)
