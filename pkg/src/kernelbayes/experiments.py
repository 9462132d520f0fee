"""Seeded two-class benchmark sweeps with mean +/- SEM aggregation.

The benchmark draws replicated training samples from two Gaussian classes,
evaluates the four classifiers (BR refit per replicate, BR_th at the true
parameters, KBR1, KBR2) on a grid of priors and test points, and aggregates
the posterior probability of class 0 across replicates.

Reproducibility contract: the stream for replicate r is
``numpy.random.default_rng([master_seed, r])`` (PCG64 seeded through
SeedSequence), so replicates are order-independent and parallelizable, and a
(spec, seed) pair pins every byte of the output.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .classifiers import (
    DegenerateInputError,
    GaussianClassStats,
    LabeledSample,
    br_posterior,
    fit_gaussian_stats,
    kbr1_posterior,
    kbr2_posterior,
)
from .numerics import SingularMatrixError, default_pinv_rtol

__all__ = [
    "DEFAULT_MASTER_SEED",
    "CLASSIFIER_ORDER",
    "RNG_FAMILY",
    "ExperimentSpec",
    "SweepRow",
    "SweepResult",
    "replicate_rng",
    "sample_mvnormal",
    "generate_training_sample",
    "sem",
    "run_prior_sweep",
    "run_grid_sweep",
]

DEFAULT_MASTER_SEED = 7
CLASSIFIER_ORDER = ("BR", "BR_th", "KBR1", "KBR2")
RNG_FAMILY = "numpy PCG64 via default_rng([master_seed, replicate_index])"

_EPS_GRID = tuple(10.0**-k for k in (1, 3, 5, 7, 9, 11, 13, 15))


@dataclass(frozen=True)
class ExperimentSpec:
    """Full description of one benchmark: data law, grids, and seeding.

    Defaults reproduce the two-class protocol this package ships with:
    50 points per class from N((1,0), 0.1 I) and N((0,1), 0.1 I), 100
    replicates, priors 0.1..0.9, and three test points on the symmetry axis.
    """

    n_per_class: int = 50
    class_means: tuple = ((1.0, 0.0), (0.0, 1.0))
    class_covs: tuple = (((0.1, 0.0), (0.0, 0.1)), ((0.1, 0.0), (0.0, 0.1)))
    replicates: int = 100
    priors: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    test_points: tuple = ((0.5, 0.5), (0.6, 0.4), (0.7, 0.3))
    sigma_grid: tuple = (0.01, 0.1, 1.0, 10.0, 100.0)
    epsilon_grid: tuple = _EPS_GRID
    delta_grid: tuple = _EPS_GRID
    master_seed: int = DEFAULT_MASTER_SEED

    def __post_init__(self):
        if self.n_per_class < 1 or self.replicates < 1:
            raise ValueError("n_per_class and replicates must be positive")
        if not (self.sigma_grid and self.epsilon_grid and self.delta_grid):
            raise ValueError("all parameter grids must be nonempty")
        if not all(0.0 < p < 1.0 for p in self.priors):
            raise ValueError("priors must lie strictly inside (0, 1)")
        if len(self.class_means) != len(self.class_covs):
            raise ValueError("class_means and class_covs must pair up")
        for cov in self.class_covs:
            if np.linalg.eigvalsh(np.asarray(cov, dtype=float)).min() <= 0:
                raise ValueError("class covariances must be positive definite")

    @property
    def num_classes(self) -> int:
        return len(self.class_means)

    @property
    def n(self) -> int:
        return self.n_per_class * self.num_classes


@dataclass(frozen=True)
class SweepRow:
    """One aggregated cell: a classifier at (prior, test point, sigma, epsilon, delta)."""

    classifier: str
    prior_c1: float
    test_x: float
    test_y: float
    sigma: float
    epsilon: float
    delta: float
    mean_post_c1: float
    sem: float
    n_replicates: int
    n_errors: int

    @property
    def flagged(self) -> bool:
        """True when more than 10% of replicates failed for this cell."""
        return self.n_errors > 0.1 * self.n_replicates


@dataclass
class SweepResult:
    """Ordered sweep rows plus the metadata needed to reproduce them."""

    rows: list[SweepRow] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)


def replicate_rng(master_seed: int, replicate_index: int) -> np.random.Generator:
    """Independent, order-free random stream for one replicate."""
    return np.random.default_rng([master_seed, replicate_index])


def sample_mvnormal(mean, cov, rng: np.random.Generator) -> np.ndarray:
    """One draw from N(mean, cov) as ``mean + L z`` with L the Cholesky factor."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance must be positive definite") from exc
    return mean + chol @ rng.standard_normal(len(mean))


def generate_training_sample(spec: ExperimentSpec, replicate_index: int) -> LabeledSample:
    """Training sample for one replicate: class-0 points first, then class 1, etc.

    Deterministic in (spec.master_seed, replicate_index); identical inputs
    give bitwise-identical samples.
    """
    if not 0 <= replicate_index < spec.replicates:
        raise ValueError(
            f"replicate_index must lie in [0, {spec.replicates}), got {replicate_index}"
        )
    rng = replicate_rng(spec.master_seed, replicate_index)
    labels = np.repeat(np.arange(spec.num_classes), spec.n_per_class)
    features = np.empty((spec.n, len(spec.class_means[0])))
    i = 0
    for mean, cov in zip(spec.class_means, spec.class_covs):
        for _ in range(spec.n_per_class):
            features[i] = sample_mvnormal(mean, cov, rng)
            i += 1
    return LabeledSample(labels=labels, features=features)


def sem(values) -> float:
    """Standard error of the mean: sample std (n-1 denominator) over sqrt(m)."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) < 2:
        raise ValueError("sem needs a 1-d vector of at least 2 values")
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def run_prior_sweep(
    spec: ExperimentSpec,
    sigma: float,
    epsilon: float,
    delta: float,
    pinv_rtol: float | None = None,
) -> SweepResult:
    """Evaluate all four classifiers over (prior, test point) at one (sigma, epsilon, delta).

    Per row, the posterior probability of class 0 is averaged over
    replicates; replicates whose classifier evaluation fails numerically are
    counted in ``n_errors`` and excluded from the mean/SEM. The two-class
    protocol is assumed (priors parameterize the class-0 probability).
    """
    if spec.num_classes != 2:
        raise ValueError("the prior sweep protocol is two-class")
    if pinv_rtol is None:
        pinv_rtol = default_pinv_rtol(spec.n, spec.n)

    samples = [generate_training_sample(spec, r) for r in range(spec.replicates)]
    fitted: list[GaussianClassStats | None] = []
    for s in samples:
        try:
            fitted.append(fit_gaussian_stats(s, spec.num_classes))
        except ValueError:
            fitted.append(None)
    th_stats = GaussianClassStats(
        means=np.asarray(spec.class_means, dtype=float),
        covariances=np.asarray(spec.class_covs, dtype=float),
    )

    def evaluate(classifier: str, prior: np.ndarray, y: np.ndarray, r: int) -> float:
        if classifier == "BR":
            if fitted[r] is None:
                raise DegenerateInputError("BR fit failed for this replicate")
            return br_posterior(fitted[r], prior, y).values[0]
        if classifier == "BR_th":
            return br_posterior(th_stats, prior, y).values[0]
        if classifier == "KBR1":
            return kbr1_posterior(samples[r], prior, y, sigma, epsilon, delta).values[0]
        if classifier == "KBR2":
            return kbr2_posterior(samples[r], prior, y, sigma, pinv_rtol).values[0]
        raise ValueError(f"unknown classifier {classifier!r}")

    rows = []
    for classifier in CLASSIFIER_ORDER:
        for p in spec.priors:
            prior = np.array([p, 1.0 - p])
            for point in spec.test_points:
                y = np.asarray(point, dtype=float)
                values = []
                n_errors = 0
                for r in range(spec.replicates):
                    try:
                        values.append(evaluate(classifier, prior, y, r))
                    except (SingularMatrixError, DegenerateInputError):
                        n_errors += 1
                mean = float(np.mean(values)) if values else math.nan
                row_sem = sem(values) if len(values) >= 2 else math.nan
                rows.append(
                    SweepRow(
                        classifier=classifier,
                        prior_c1=float(p),
                        test_x=float(y[0]),
                        test_y=float(y[1]),
                        sigma=float(sigma),
                        epsilon=float(epsilon),
                        delta=float(delta),
                        mean_post_c1=mean,
                        sem=row_sem,
                        n_replicates=spec.replicates,
                        n_errors=n_errors,
                    )
                )
    return SweepResult(rows=rows, metadata=_sweep_metadata(spec, pinv_rtol))


def run_grid_sweep(
    spec: ExperimentSpec,
    replicates: int | None = None,
    pinv_rtol: float | None = None,
) -> SweepResult:
    """Cross product of the spec's sigma, epsilon, and delta grids.

    ``replicates`` optionally down-scales the per-cell replicate count for
    desk-scale runs; the override is recorded in the result metadata.
    """
    if replicates is not None:
        spec = dataclasses.replace(spec, replicates=replicates)
    result = SweepResult(metadata=_sweep_metadata(spec, pinv_rtol))
    if replicates is not None:
        result.metadata["replicates_override"] = str(replicates)
    for sigma in spec.sigma_grid:
        for epsilon in spec.epsilon_grid:
            for delta in spec.delta_grid:
                cell = run_prior_sweep(spec, sigma, epsilon, delta, pinv_rtol)
                result.rows.extend(cell.rows)
    return result


def _sweep_metadata(spec: ExperimentSpec, pinv_rtol: float | None) -> dict[str, str]:
    if pinv_rtol is None:
        pinv_rtol = default_pinv_rtol(spec.n, spec.n)
    return {
        "master_seed": str(spec.master_seed),
        "replicates": str(spec.replicates),
        "n_per_class": str(spec.n_per_class),
        "rng_family": RNG_FAMILY,
        "pinv_rtol": repr(pinv_rtol),
    }
