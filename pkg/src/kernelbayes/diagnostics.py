"""Executable diagnostics for the regularized-inversion pipeline.

Three families of checks, each phrased as a finite-sample, seeded procedure:

* prior influence: how far apart the KBR1 posteriors of two different priors
  are, and how the ridge posterior operator collapses to ``inv(G_Y)`` as its
  delta regularizer vanishes;
* almost-sure non-singularity: randomized trials of Gram-matrix and
  prior-weight non-degeneracy, reported as pass fractions with smallest
  observed statistics (almost-sure statements cannot be tested literally, so
  the thresholds below operationalize them);
* RKHS-norm divergence: the norm of the ridge solution against targets that
  lie outside the empirical operator's comfortable range grows without bound
  as the regularizer shrinks. The probe discretizes the covariance operator
  as ``(1/n) G_X + eps I``, a standard empirical surrogate, and reports the
  trend rather than a rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifiers import LabeledSample, kbr1_posterior
from .embedding import KbrWeights, PriorMixture, kbr_weights, posterior_operator_ridge, prior_mean_vector
from .kernels import GaussianKernel, GramMatrix, gram_matrix
from .numerics import singular_values, solve_ridge

__all__ = [
    "TrialReport",
    "ConstantTarget",
    "KernelSectionTarget",
    "prior_independence_gap",
    "gram_condition_statistic",
    "gram_nonsingularity_trial",
    "weights_nonzero_trial",
    "rkhs_norm_divergence_probe",
    "limit_identity_check",
]

GRAM_NONSINGULAR_THRESHOLD = 1e-10
WEIGHTS_NONZERO_THRESHOLD = 1e-14
LIMIT_SCREEN_THRESHOLD = 1e-8


@dataclass(frozen=True)
class TrialReport:
    """Aggregated randomized-trial outcome, reproducible bitwise from its seed."""

    trials: int
    passes: int
    stat_min: float
    stat_median: float
    seed: int

    def __post_init__(self):
        if not 0 <= self.passes <= self.trials:
            raise ValueError("passes must lie in [0, trials]")

    @property
    def pass_fraction(self) -> float:
        return self.passes / self.trials


@dataclass(frozen=True)
class ConstantTarget:
    """Constant function target for the divergence probe."""

    value: float


@dataclass(frozen=True)
class KernelSectionTarget:
    """Scaled kernel section ``exp(-(x - center)^2 / (2 sigma^2))`` as target."""

    center: float


def prior_independence_gap(
    sample: LabeledSample,
    prior_a,
    prior_b,
    y,
    sigma: float,
    epsilon: float,
    delta: float,
) -> float:
    """Largest per-class difference between KBR1 posteriors under two priors.

    Zero (to solver accuracy) whenever delta = 0 with nonsingular weights and
    G_Y: in that regime the posterior operator never sees the prior.
    """
    a = np.asarray(prior_a, dtype=float)
    b = np.asarray(prior_b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("both priors must be strictly positive")
    post_a = kbr1_posterior(sample, a, y, sigma, epsilon, delta)
    post_b = kbr1_posterior(sample, b, y, sigma, epsilon, delta)
    return float(np.max(np.abs(post_a.values - post_b.values)))


def gram_condition_statistic(points, sigma: float) -> float:
    """Smallest over largest singular value of the Gaussian Gram matrix."""
    gm = gram_matrix(np.asarray(points, dtype=float), GaussianKernel(sigma))
    sv = singular_values(gm.entries)
    return float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0


def gram_nonsingularity_trial(
    n: int, d: int, sigma: float, trials: int, seed: int
) -> TrialReport:
    """Randomized non-singularity check for Gaussian Gram matrices.

    Per trial: draw n i.i.d. points from N(0, I_d), build the Gram matrix,
    and pass iff the smallest singular value exceeds
    ``GRAM_NONSINGULAR_THRESHOLD`` times the largest.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    stats = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        points = rng.standard_normal((n, d))
        stats[t] = gram_condition_statistic(points, sigma)
    passes = int(np.sum(stats > GRAM_NONSINGULAR_THRESHOLD))
    return TrialReport(
        trials=trials,
        passes=passes,
        stat_min=float(stats.min()),
        stat_median=float(np.median(stats)),
        seed=seed,
    )


def weights_nonzero_trial(
    n: int,
    d: int,
    sigma: float,
    epsilon: float,
    prior: PriorMixture,
    trials: int,
    seed: int,
) -> TrialReport:
    """Randomized check that no ridge prior weight collapses to zero.

    Per trial: draw n i.i.d. points from N(0, I_d), solve for the prior
    weights at the given epsilon > 0, and pass iff
    ``min |mu_i| > WEIGHTS_NONZERO_THRESHOLD * max |mu_i|``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    kernel = GaussianKernel(sigma)
    stats = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        points = rng.standard_normal((n, d))
        gx = gram_matrix(points, kernel)
        m_pi = prior_mean_vector(prior, points, kernel)
        mu = np.abs(kbr_weights(gx, m_pi, epsilon).mu)
        stats[t] = mu.min() / mu.max() if mu.max() > 0 else 0.0
    passes = int(np.sum(stats > WEIGHTS_NONZERO_THRESHOLD))
    return TrialReport(
        trials=trials,
        passes=passes,
        stat_min=float(stats.min()),
        stat_median=float(np.median(stats)),
        seed=seed,
    )


def rkhs_norm_divergence_probe(
    n: int,
    sigma0: float,
    sigma: float,
    target: ConstantTarget | KernelSectionTarget,
    epsilon_grid,
    seed: int,
) -> list[tuple[float, float]]:
    """RKHS norm of the ridge solution as the regularizer shrinks.

    Draws ``X_1..X_n`` i.i.d. from N(0, sigma0^2) on the line, forms the
    target vector v (a constant, or the scaled kernel section evaluated at
    the sample), and for each eps in the strictly decreasing positive grid
    solves ``((1/n) G_X + eps I) alpha = v / n`` and records
    ``sqrt(alpha^T G_X alpha)``. A norm series that keeps growing as eps
    shrinks is the finite-sample signature of a target outside the
    operator's range (or outside the RKHS entirely).
    """
    eps = [float(e) for e in epsilon_grid]
    if not eps or any(e <= 0 for e in eps):
        raise ValueError("epsilon_grid must be nonempty with positive entries")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon_grid must be strictly decreasing")
    if n < 10:
        raise ValueError("probe needs n >= 10")

    rng = np.random.default_rng([seed, 0])
    points = sigma0 * rng.standard_normal(n)
    gx = gram_matrix(points, GaussianKernel(sigma)).entries

    if isinstance(target, ConstantTarget):
        v = np.full(n, target.value)
    elif isinstance(target, KernelSectionTarget):
        v = np.exp(-((points - target.center) ** 2) / (2.0 * sigma**2))
    else:
        raise TypeError(f"unsupported target type {type(target).__name__}")

    series = []
    for e in eps:
        alpha = solve_ridge(gx / n, v / n, e)
        norm_sq = float(alpha @ gx @ alpha)
        series.append((e, math.sqrt(max(norm_sq, 0.0))))
    return series


def limit_identity_check(
    mu: KbrWeights, gy: GramMatrix, delta_grid
) -> list[tuple[float, float]]:
    """Relative Frobenius distance of the ridge operator to ``inv(G_Y)`` per delta.

    Both diag(mu) and G_Y must pass a non-singularity screen (smallest
    singular value above ``LIMIT_SCREEN_THRESHOLD`` times the largest);
    failing the screen is a reported precondition error, not a bug.
    """
    abs_mu = np.abs(mu.mu)
    if abs_mu.max() == 0 or abs_mu.min() <= LIMIT_SCREEN_THRESHOLD * abs_mu.max():
        raise ValueError(
            "weights fail the non-singularity screen "
            f"(min |mu| / max |mu| = {abs_mu.min() / max(abs_mu.max(), 1e-300):.3e})"
        )
    sv = singular_values(gy.entries)
    if sv[0] == 0 or sv[-1] <= LIMIT_SCREEN_THRESHOLD * sv[0]:
        raise ValueError(
            f"G_Y fails the non-singularity screen (s_min/s_max = {sv[-1] / max(sv[0], 1e-300):.3e})"
        )

    gy_inv = np.linalg.solve(gy.entries, np.eye(gy.n))
    gy_inv_norm = np.linalg.norm(gy_inv)
    series = []
    for delta in delta_grid:
        op = posterior_operator_ridge(mu, gy, float(delta))
        dist = float(np.linalg.norm(op.matrix - gy_inv) / gy_inv_norm)
        series.append((float(delta), dist))
    return series
