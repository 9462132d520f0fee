import numpy as np
import pytest

from kernelbayes.numerics import (
    SingularMatrixError,
    default_pinv_rtol,
    pseudo_inverse,
    singular_values,
    solve_ridge,
)


def random_matrix_with_rank(rng, m, n, rank):
    """Exact-rank construction: product of (m, rank) and (rank, n) factors."""
    if rank == 0:
        return np.zeros((m, n))
    return rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n))


class TestSolveRidge:
    def test_identity_plus_ridge(self):
        x = solve_ridge(np.eye(2), np.array([2.0, 2.0]), rho=1.0)
        np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-14)

    def test_pure_ridge_scaling(self):
        x = solve_ridge(np.zeros((3, 3)), np.array([1.0, 2.0, 3.0]), rho=0.5)
        np.testing.assert_allclose(x, [2.0, 4.0, 6.0], atol=1e-14)

    def test_random_spd_multiply_back(self):
        rng = np.random.default_rng(11)
        B = rng.standard_normal((10, 10))
        A = B @ B.T + 0.1 * np.eye(10)
        b = rng.standard_normal(10)
        rho = 1e-3
        x = solve_ridge(A, b, rho)
        residual = np.linalg.norm((A + rho * np.eye(10)) @ x - b)
        assert residual <= 1e-10 * (np.linalg.norm(A) + rho) * np.linalg.norm(x)

    def test_indefinite_fallback_path(self):
        # Cholesky fails on diag(1, -1); the eigendecomposition path must solve it.
        A = np.diag([1.0, -1.0])
        b = np.array([3.0, 4.0])
        x = solve_ridge(A, b, rho=0.0)
        np.testing.assert_allclose(A @ x, b, atol=1e-12)

    def test_singular_system_raises_with_estimate(self):
        with pytest.raises(SingularMatrixError) as err:
            solve_ridge(np.zeros((2, 2)), np.array([1.0, 1.0]), rho=0.0)
        assert err.value.smallest_eigenvalue is not None
        assert err.value.smallest_eigenvalue <= 1e-14

    def test_agrees_with_pseudo_inverse_at_zero_ridge(self):
        rng = np.random.default_rng(3)
        B = rng.standard_normal((6, 6))
        A = B @ B.T + np.eye(6)
        b = rng.standard_normal(6)
        x = solve_ridge(A, b, rho=0.0)
        x_pinv = pseudo_inverse(A) @ b
        assert np.linalg.norm(x - x_pinv) <= 1e-8 * np.linalg.norm(x)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError, match="symmetric"):
            solve_ridge(np.array([[1.0, 2.0], [0.0, 1.0]]), np.zeros(2), 0.1)
        with pytest.raises(ValueError, match="nonnegative"):
            solve_ridge(np.eye(2), np.zeros(2), -1.0)


class TestPseudoInverse:
    def test_rank_deficient_diagonal(self):
        np.testing.assert_allclose(
            pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), atol=1e-15
        )

    def test_identity(self):
        np.testing.assert_allclose(pseudo_inverse(np.eye(4)), np.eye(4), atol=1e-14)

    def test_zero_matrix_maps_to_zero(self):
        np.testing.assert_array_equal(pseudo_inverse(np.zeros((3, 2))), np.zeros((2, 3)))

    def test_nonsingular_matches_column_solves(self):
        rng = np.random.default_rng(8)
        A = rng.standard_normal((5, 5)) + 2.0 * np.eye(5)
        inv_by_solve = np.linalg.solve(A, np.eye(5))
        assert np.linalg.norm(pseudo_inverse(A) - inv_by_solve) < 1e-8

    def test_penrose_conditions_mixed_shapes_and_ranks(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            m = int(rng.integers(1, 13))
            n = int(rng.integers(1, 13))
            rank = int(rng.integers(0, min(m, n) + 1))
            A = random_matrix_with_rank(rng, m, n, rank)
            P = pseudo_inverse(A)
            norm_a = np.linalg.norm(A)
            norm_p = np.linalg.norm(P)
            scale = max(1.0, norm_a)
            assert np.linalg.norm(A @ P @ A - A) <= 1e-10 * max(norm_a, 1e-300)
            assert np.linalg.norm(P @ A @ P - P) <= 1e-10 * max(norm_p, 1e-300)
            assert np.linalg.norm((A @ P).T - A @ P) <= 1e-10 * scale
            assert np.linalg.norm((P @ A).T - P @ A) <= 1e-10 * scale

    def test_tolerance_validation(self):
        with pytest.raises(ValueError, match="rel_tolerance"):
            pseudo_inverse(np.eye(2), rel_tolerance=1.5)
        with pytest.raises(ValueError, match="rel_tolerance"):
            pseudo_inverse(np.eye(2), rel_tolerance=0.0)

    def test_default_rtol_scales_with_size(self):
        assert default_pinv_rtol(3, 7) == pytest.approx(7e-12)


class TestSingularValues:
    def test_absolute_diagonal_sorted(self):
        np.testing.assert_allclose(singular_values(np.diag([3.0, -4.0])), [4.0, 3.0], atol=1e-14)

    def test_rank_one_outer_product(self):
        rng = np.random.default_rng(21)
        u = rng.standard_normal(4)
        v = rng.standard_normal(4)
        sv = singular_values(np.outer(u, v))
        assert np.sum(sv > 1e-10 * sv[0]) == 1

    def test_identity(self):
        np.testing.assert_allclose(singular_values(np.eye(3)), [1.0, 1.0, 1.0], atol=1e-15)

    def test_transpose_invariant(self):
        rng = np.random.default_rng(31)
        A = rng.standard_normal((4, 7))
        np.testing.assert_allclose(singular_values(A), singular_values(A.T), atol=1e-12)

    def test_product_equals_abs_determinant(self):
        rng = np.random.default_rng(41)
        A = rng.standard_normal((5, 5)) + 3.0 * np.eye(5)
        sv = singular_values(A)
        det = abs(np.linalg.det(A))
        assert np.prod(sv) == pytest.approx(det, rel=1e-8)
