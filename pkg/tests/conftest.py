"""Shared constructions for the test suite.

The well-conditioned Gram setups use rejection sampling (wide point clouds,
condition number capped at 300) so that inverse-identity checks run far from
the conditioning limits of double precision. The default sweep fixture runs
the full shipped protocol once per session; several modules assert against
its rows.
"""

import numpy as np
import pytest

import kernelbayes as kb
from kernelbayes.embedding import KbrWeights
from kernelbayes.kernels import GaussianKernel, gram_matrix
from kernelbayes.numerics import singular_values

SEED = kb.DEFAULT_MASTER_SEED

UNIT_COVS = (((1.0, 0.0), (0.0, 1.0)), ((1.0, 0.0), (0.0, 1.0)))


def conditioned_setups(count, n, seed=SEED, spread=4.0, cond_cap=300.0, sigma=1.0):
    """Gaussian-kernel Grams with positive diagonal weights, screened to cond <= cap."""
    setups = []
    attempt = 0
    while len(setups) < count:
        rng = np.random.default_rng([seed, 5000 + attempt])
        attempt += 1
        if attempt > 50 * count:
            raise RuntimeError("conditioning screen rejected too many draws")
        points = spread * rng.standard_normal((n, 2))
        gy = gram_matrix(points, GaussianKernel(sigma))
        sv = singular_values(gy.entries)
        if sv[0] / sv[-1] > cond_cap:
            continue
        weights = KbrWeights(mu=rng.uniform(0.5, 1.5, n), epsilon=0.0, n=n)
        setups.append((weights, gy, points))
    return setups


def wide_spec(n_per_class, replicates, seed=SEED):
    """Two-class spec with unit covariances: well-conditioned Grams at sigma = 1."""
    return kb.ExperimentSpec(
        n_per_class=n_per_class,
        replicates=replicates,
        master_seed=seed,
        class_covs=UNIT_COVS,
    )


@pytest.fixture(scope="session")
def default_sweep():
    """Full shipped protocol: sigma=0.1, epsilon=delta=1e-7, 100 replicates."""
    spec = kb.ExperimentSpec(master_seed=SEED)
    return kb.run_prior_sweep(spec, sigma=0.1, epsilon=1e-7, delta=1e-7)


def sweep_rows(result, classifier, test_point=None):
    rows = [r for r in result.rows if r.classifier == classifier]
    if test_point is not None:
        rows = [r for r in rows if (r.test_x, r.test_y) == test_point]
    return {r.prior_c1: r for r in rows}
