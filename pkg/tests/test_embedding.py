import numpy as np
import pytest

from kernelbayes.embedding import (
    KbrWeights,
    PriorMixture,
    class_prior,
    conditional_embedding_weights,
    kbr_weights,
    posterior_embedding_weights,
    posterior_expectation,
    posterior_operator_pinv,
    posterior_operator_ridge,
    prior_mean_vector,
)
from kernelbayes.kernels import DeltaKernel, GaussianKernel, gram_matrix, kernel_vector
from kernelbayes.numerics import SingularMatrixError

from conftest import conditioned_setups


def prior_mean_oracle(prior, anchors, kernel):
    """Naive double loop: sum_j gamma_j k(anchor_i, U_j)."""
    out = np.zeros(len(anchors))
    for i, anchor in enumerate(anchors):
        for gamma, atom in zip(prior.weights, prior.atoms):
            out[i] += gamma * kernel(anchor, atom)
    return out


def ridge_operator_oracle(mu, gy, delta):
    """Direct inverse of the defining formula."""
    lam = np.diag(mu)
    b = lam @ gy
    return b @ np.linalg.inv(b @ b + delta * np.eye(len(mu))) @ lam


class TestPriorMixture:
    def test_validation(self):
        with pytest.raises(ValueError):
            PriorMixture(weights=np.array([]), atoms=np.array([]))
        with pytest.raises(ValueError):
            PriorMixture(weights=np.array([1.0, 2.0]), atoms=np.array([0]))

    def test_class_prior_constraints(self):
        p = class_prior([0.3, 0.7])
        np.testing.assert_array_equal(p.atoms, [0, 1])
        with pytest.raises(ValueError, match="sum to 1"):
            class_prior([0.3, 0.6])
        with pytest.raises(ValueError, match="nonnegative"):
            class_prior([-0.1, 1.1])


class TestPriorMeanVector:
    def test_delta_kernel_class_pattern(self):
        # indicator kernel reads off the prior weight of each anchor's class
        anchors = np.array([0] * 50 + [1] * 50)
        m_pi = prior_mean_vector(class_prior([0.3, 0.7]), anchors, DeltaKernel())
        np.testing.assert_allclose(m_pi[:50], 0.3, atol=1e-15)
        np.testing.assert_allclose(m_pi[50:], 0.7, atol=1e-15)

    def test_single_atom_indicator(self):
        prior = PriorMixture(weights=np.array([1.0]), atoms=np.array([4]))
        m_pi = prior_mean_vector(prior, np.array([4, 5, 6]), DeltaKernel())
        np.testing.assert_array_equal(m_pi, [1.0, 0.0, 0.0])

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(6)
        kernel = GaussianKernel(0.9)
        prior = PriorMixture(weights=rng.standard_normal(2), atoms=rng.standard_normal((2, 2)))
        anchors = rng.standard_normal((3, 2))
        np.testing.assert_allclose(
            prior_mean_vector(prior, anchors, kernel),
            prior_mean_oracle(prior, anchors, kernel),
            atol=1e-14,
        )


class TestKbrWeights:
    def test_two_class_block_formula(self):
        # delta-kernel Gram is block all-ones; symmetry forces per-class constants
        # mu = p / (n_c + n * eps) with n_c = 50, n = 100
        labels = np.array([0] * 50 + [1] * 50)
        gx = gram_matrix(labels, DeltaKernel())
        p = 0.3
        eps = 1e-3
        m_pi = prior_mean_vector(class_prior([p, 1 - p]), labels, DeltaKernel())
        w = kbr_weights(gx, m_pi, eps)
        np.testing.assert_allclose(w.mu[:50], p / (50 + 100 * eps), rtol=1e-12)
        np.testing.assert_allclose(w.mu[50:], (1 - p) / (50 + 100 * eps), rtol=1e-12)
        direct = np.linalg.solve(gx.entries + 100 * eps * np.eye(100), m_pi)
        np.testing.assert_allclose(w.mu, direct, atol=1e-14)

    def test_identity_gram_zero_epsilon(self):
        gx = gram_matrix(np.array([0, 1]), DeltaKernel())
        w = kbr_weights(gx, np.array([0.4, 0.6]), 0.0)
        np.testing.assert_allclose(w.mu, [0.4, 0.6], atol=1e-15)

    def test_multiply_back_residual(self):
        rng = np.random.default_rng(15)
        points = rng.standard_normal((12, 2))
        gx = gram_matrix(points, GaussianKernel(1.0))
        m_pi = rng.standard_normal(12)
        eps = 1e-3
        w = kbr_weights(gx, m_pi, eps)
        system = gx.entries + 12 * eps * np.eye(12)
        assert np.linalg.norm(system @ w.mu - m_pi) <= 1e-10 * np.linalg.norm(m_pi)

    def test_linear_in_prior_vector(self):
        rng = np.random.default_rng(25)
        points = rng.standard_normal((8, 2))
        gx = gram_matrix(points, GaussianKernel(1.0))
        m1, m2 = rng.standard_normal(8), rng.standard_normal(8)
        a, b = 0.7, -1.3
        combined = kbr_weights(gx, a * m1 + b * m2, 1e-2).mu
        separate = a * kbr_weights(gx, m1, 1e-2).mu + b * kbr_weights(gx, m2, 1e-2).mu
        np.testing.assert_allclose(combined, separate, atol=1e-10)

    def test_singular_gram_at_zero_epsilon(self):
        gx = gram_matrix(np.array([0, 0, 1]), DeltaKernel())
        with pytest.raises(SingularMatrixError, match="prior weight"):
            kbr_weights(gx, np.array([0.5, 0.5, 0.5]), 0.0)


class TestPosteriorOperatorRidge:
    def test_two_by_two_collapses_to_inverse(self):
        # delta=0 with nonsingular factors: R equals inv(G_Y) exactly;
        # inv([[2,1],[1,2]]) = [[2/3,-1/3],[-1/3,2/3]]
        from kernelbayes.kernels import GramMatrix

        gy = GramMatrix(entries=np.array([[2.0, 1.0], [1.0, 2.0]]), kernel=DeltaKernel())
        w = KbrWeights(mu=np.array([1.0, 2.0]), epsilon=0.0, n=2)
        op = posterior_operator_ridge(w, gy, 0.0)
        expected = np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3.0
        np.testing.assert_allclose(op.matrix, expected, atol=1e-12)
        np.testing.assert_allclose(op.matrix, np.linalg.inv(gy.entries), atol=1e-12)

    def test_identity_scalar_formula(self):
        gy = gram_matrix(np.array([0, 1, 2]), DeltaKernel())
        w = KbrWeights(mu=np.ones(3), epsilon=0.0, n=3)
        op = posterior_operator_ridge(w, gy, 1.0)
        np.testing.assert_allclose(op.matrix, 0.5 * np.eye(3), atol=1e-14)

    def test_small_delta_near_inverse(self):
        (w, gy, _), = conditioned_setups(1, 6)
        op = posterior_operator_ridge(w, gy, 1e-12)
        gy_inv = np.linalg.inv(gy.entries)
        rel = np.linalg.norm(op.matrix - gy_inv) / np.linalg.norm(gy_inv)
        assert rel < 1e-6

    def test_matches_direct_inverse_oracle(self):
        (w, gy, _), = conditioned_setups(1, 5)
        delta = 1e-3
        op = posterior_operator_ridge(w, gy, delta)
        np.testing.assert_allclose(
            op.matrix, ridge_operator_oracle(w.mu, gy.entries, delta), atol=1e-10
        )

    def test_zero_delta_singular_raises(self):
        gy = gram_matrix(np.array([0, 0]), DeltaKernel())
        w = KbrWeights(mu=np.array([1.0, 1.0]), epsilon=0.0, n=2)
        with pytest.raises(SingularMatrixError, match="delta=0"):
            posterior_operator_ridge(w, gy, 0.0)

    def test_delta_collapse_monotone_to_inverse(self):
        # distance to inv(G_Y) shrinks through the delta grid and ends < 1e-6
        deltas = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12)
        for w, gy, _ in conditioned_setups(10, 8):
            gy_inv = np.linalg.inv(gy.entries)
            norm = np.linalg.norm(gy_inv)
            dists = [
                np.linalg.norm(posterior_operator_ridge(w, gy, d).matrix - gy_inv) / norm
                for d in deltas
            ]
            assert all(b <= a for a, b in zip(dists, dists[1:]))
            assert dists[-1] < 1e-6

    def test_exact_zero_delta_identity(self):
        for w, gy, _ in conditioned_setups(5, 8):
            op = posterior_operator_ridge(w, gy, 0.0)
            gy_inv = np.linalg.inv(gy.entries)
            assert np.linalg.norm(op.matrix - gy_inv) / np.linalg.norm(gy_inv) < 1e-8


class TestPosteriorOperatorPinv:
    def test_well_conditioned_is_prior_independent_inverse(self):
        (w, gy, points), = conditioned_setups(1, 4)
        gx = gram_matrix(points, GaussianKernel(1.0))
        rng = np.random.default_rng(14)
        m_a = rng.uniform(0.5, 1.5, 4)
        m_b = rng.uniform(0.5, 1.5, 4)
        op_a = posterior_operator_pinv(gx, m_a, gy)
        op_b = posterior_operator_pinv(gx, m_b, gy)
        gy_inv = np.linalg.inv(gy.entries)
        assert np.linalg.norm(op_a.matrix - gy_inv) < 1e-8 * np.linalg.norm(gy_inv)
        rel_gap = np.linalg.norm(op_a.matrix - op_b.matrix) / np.linalg.norm(gy_inv)
        assert rel_gap < 1e-8

    def test_zero_prior_mean_gives_zero_operator(self):
        (w, gy, points), = conditioned_setups(1, 4)
        gx = gram_matrix(points, GaussianKernel(1.0))
        op = posterior_operator_pinv(gx, np.zeros(4), gy)
        np.testing.assert_array_equal(op.matrix, np.zeros((4, 4)))

    def test_block_gram_pseudoinverse_weights(self):
        # pinv of the two-block all-ones Gram spreads each class prior over
        # its block: diag entries p/50 and (1-p)/50
        labels = np.array([0] * 50 + [1] * 50)
        gx = gram_matrix(labels, DeltaKernel())
        gy = gram_matrix(np.random.default_rng(3).standard_normal((100, 2)), GaussianKernel(1.0))
        p = 0.3
        m_pi = prior_mean_vector(class_prior([p, 1 - p]), labels, DeltaKernel())
        from kernelbayes.numerics import pseudo_inverse

        mu_prime = pseudo_inverse(gx.entries) @ m_pi
        np.testing.assert_allclose(mu_prime[:50], p / 50, atol=1e-12)
        np.testing.assert_allclose(mu_prime[50:], (1 - p) / 50, atol=1e-12)


class TestPosteriorEvaluation:
    def test_zero_function_values(self):
        (w, gy, _), = conditioned_setups(1, 5)
        op = posterior_operator_ridge(w, gy, 1e-3)
        ky = np.ones(5)
        assert posterior_expectation(np.zeros(5), op, ky) == 0.0

    def test_identity_operator_picks_component(self):
        from kernelbayes.embedding import PosteriorOperator

        op = PosteriorOperator(matrix=np.eye(4), method="ridge", provenance={})
        assert posterior_expectation(np.eye(4)[0], op, np.eye(4)[0]) == 1.0
        np.testing.assert_array_equal(posterior_embedding_weights(op, np.eye(4)[1]), np.eye(4)[1])

    def test_matches_triple_loop_oracle(self):
        rng = np.random.default_rng(42)
        from kernelbayes.embedding import PosteriorOperator

        matrix = rng.standard_normal((5, 5))
        op = PosteriorOperator(matrix=matrix, method="ridge", provenance={})
        f = rng.standard_normal(5)
        ky = rng.standard_normal(5)
        expected = 0.0
        for i in range(5):
            for j in range(5):
                expected += f[i] * matrix[i, j] * ky[j]
        assert posterior_expectation(f, op, ky) == pytest.approx(expected, abs=1e-12)

    def test_weights_consistent_with_expectation(self):
        rng = np.random.default_rng(52)
        (w, gy, _), = conditioned_setups(1, 6)
        op = posterior_operator_ridge(w, gy, 1e-4)
        f = rng.standard_normal(6)
        ky = rng.standard_normal(6)
        via_weights = f @ posterior_embedding_weights(op, ky)
        assert posterior_expectation(f, op, ky) == pytest.approx(via_weights, abs=1e-12)

    def test_zero_kernel_vector_gives_zero_weights(self):
        (w, gy, _), = conditioned_setups(1, 5)
        op = posterior_operator_ridge(w, gy, 1e-3)
        np.testing.assert_array_equal(posterior_embedding_weights(op, np.zeros(5)), np.zeros(5))

    def test_dimension_mismatch_rejected(self):
        (w, gy, _), = conditioned_setups(1, 5)
        op = posterior_operator_ridge(w, gy, 1e-3)
        with pytest.raises(ValueError):
            posterior_expectation(np.zeros(4), op, np.zeros(5))
        with pytest.raises(ValueError):
            posterior_embedding_weights(op, np.zeros(6))


class TestConditionalEmbeddingWeights:
    def test_identity_gram(self):
        gx = gram_matrix(np.array([0, 1]), DeltaKernel())
        w = conditional_embedding_weights(gx, np.array([1.0, 0.0]), 0.5)
        np.testing.assert_allclose(w, [0.5, 0.0], atol=1e-15)

    def test_weight_concentrates_on_matching_point(self):
        # well-separated points (10 sigma apart): the conditioning point's own
        # index dominates the weight vector
        points = np.arange(5.0)[:, None] * 10.0
        kernel = GaussianKernel(1.0)
        gx = gram_matrix(points, kernel)
        kx = kernel_vector(points, points[2], kernel)
        w = conditional_embedding_weights(gx, kx, 1e-4)
        assert np.argmax(w) == 2

    def test_multiply_back_residual(self):
        rng = np.random.default_rng(62)
        points = rng.standard_normal((9, 2))
        gx = gram_matrix(points, GaussianKernel(1.0))
        kx = rng.standard_normal(9)
        eps = 1e-2
        w = conditional_embedding_weights(gx, kx, eps)
        system = gx.entries + 9 * eps * np.eye(9)
        assert np.linalg.norm(system @ w - kx) <= 1e-10 * np.linalg.norm(kx)

    def test_requires_positive_epsilon(self):
        gx = gram_matrix(np.array([0, 1]), DeltaKernel())
        with pytest.raises(ValueError, match="positive"):
            conditional_embedding_weights(gx, np.array([1.0, 0.0]), 0.0)
