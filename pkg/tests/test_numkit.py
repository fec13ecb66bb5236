import numpy as np
import pytest

from conftest import SEEDS, make_rng
from lcae.utils.errors import NumericError, ShapeError
from lcae.utils.numkit import (
    append_bias_row,
    as_mat,
    logit,
    max_eig_sym,
    ridge_lstsq_left,
    sigmoid,
    stacked_ridge_solve,
)


class TestSigmoidLogit:
    def test_sigmoid_zero(self):
        assert sigmoid(np.zeros((1, 1)))[0, 0] == 0.5

    def test_sigmoid_saturates_inside_open_interval(self):
        v = sigmoid(np.array([[50.0]]))[0, 0]
        assert 1 - 1e-15 < v < 1

    def test_sigmoid_stays_positive_for_large_negative(self):
        assert sigmoid(np.array([[-800.0]]))[0, 0] > 0

    def test_sigmoid_symmetry(self):
        assert sigmoid(-1.3) == pytest.approx(1 - sigmoid(1.3), abs=1e-15)

    def test_logit_half(self):
        assert logit(np.array([[0.5]]))[0, 0] == 0.0

    def test_logit_inverts_sigmoid(self):
        assert logit(sigmoid(3.7), 1e-6) == pytest.approx(3.7, abs=1e-9)

    def test_logit_clamps_out_of_range(self):
        expected = np.log((1 - 1e-6) / 1e-6)
        assert logit(np.array([1.2]), 1e-6)[0] == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(13.8155, abs=1e-4)

    def test_logit_finite_everywhere(self):
        out = logit(np.array([-3.0, 0.0, 1.0, 7.0]))
        assert np.all(np.isfinite(out))

    def test_logit_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            logit(np.array([0.5]), 0.7)

    def test_round_trip_on_safe_range(self):
        x = np.linspace(-10, 10, 401)
        np.testing.assert_allclose(logit(sigmoid(x)), x, atol=1e-9)


class TestAsMat:
    def test_vector_becomes_column(self):
        assert as_mat([1.0, 2.0, 3.0]).shape == (3, 1)

    def test_rejects_nan(self):
        with pytest.raises(NumericError):
            as_mat([[1.0, np.nan]])

    def test_rejects_3d(self):
        with pytest.raises(ShapeError):
            as_mat(np.zeros((2, 2, 2)))

    def test_bias_row(self):
        X = np.arange(6.0).reshape(2, 3)
        Xb = append_bias_row(X)
        assert Xb.shape == (3, 3)
        np.testing.assert_array_equal(Xb[-1], np.ones(3))


class TestRidgeLstsqLeft:
    def test_identity_right_factor(self, rng):
        Y = rng.standard_normal((4, 5))
        np.testing.assert_allclose(ridge_lstsq_left(Y, np.eye(5), delta=0.0), Y, atol=1e-12)

    def test_recovers_consistent_system(self, rng):
        W = rng.standard_normal((5, 4))
        Z = rng.standard_normal((4, 12))
        np.testing.assert_allclose(ridge_lstsq_left(W @ Z, Z, delta=0.0), W, atol=1e-8)

    def test_matches_pseudo_inverse(self, rng):
        Y = rng.standard_normal((8, 20))
        Z = rng.standard_normal((6, 20))
        oracle = Y @ np.linalg.pinv(Z)
        np.testing.assert_allclose(ridge_lstsq_left(Y, Z, delta=1e-8), oracle, atol=1e-6)

    def test_singular_without_ridge(self):
        with pytest.raises(NumericError, match="delta > 0"):
            ridge_lstsq_left(np.ones((2, 4)), np.zeros((3, 4)), delta=0.0)

    def test_singular_with_ridge_is_fine(self):
        W = ridge_lstsq_left(np.ones((2, 4)), np.zeros((3, 4)), delta=1e-8)
        np.testing.assert_array_equal(W, np.zeros((2, 3)))

    def test_column_mismatch(self):
        with pytest.raises(ShapeError):
            ridge_lstsq_left(np.ones((2, 4)), np.ones((3, 5)))

    @pytest.mark.parametrize("seed", SEEDS)
    def test_normal_equations_hold(self, seed):
        rng = make_rng(seed)
        Y = rng.standard_normal((5, 30))
        Z = rng.standard_normal((6, 30))
        delta = 1e-8
        W = ridge_lstsq_left(Y, Z, delta)
        lhs = W @ (Z @ Z.T + delta * np.eye(6))
        rhs = Y @ Z.T
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) < 1e-8

    def test_deterministic(self, rng):
        Y = rng.standard_normal((5, 30))
        Z = rng.standard_normal((6, 30))
        np.testing.assert_array_equal(ridge_lstsq_left(Y, Z), ridge_lstsq_left(Y, Z))


class TestStackedRidgeSolve:
    def test_single_identity_block(self, rng):
        C = rng.standard_normal((4, 6))
        np.testing.assert_allclose(stacked_ridge_solve([(np.eye(4), C, 1.0)]), C, atol=1e-14)

    def test_average_of_two_targets(self, rng):
        X = rng.standard_normal((3, 5))
        C = rng.standard_normal((3, 5))
        Z = stacked_ridge_solve([(np.eye(3), X, 1.0), (np.eye(3), C, 1.0)])
        np.testing.assert_allclose(Z, (X + C) / 2, atol=1e-14)

    def test_matches_concatenated_oracle(self, rng):
        q, N = 5, 7
        blocks = [(rng.standard_normal((m, q)), rng.standard_normal((m, N)), w)
                  for m, w in ((6, 1.0), (4, 0.3), (8, 2.5))]
        A = np.vstack([np.sqrt(w) * Ai for Ai, _, w in blocks])
        C = np.vstack([np.sqrt(w) * Ci for _, Ci, w in blocks])
        oracle = np.linalg.pinv(A) @ C
        np.testing.assert_allclose(stacked_ridge_solve(blocks), oracle, atol=1e-8)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_single_block_weight_independent(self, seed):
        rng = make_rng(seed)
        A = rng.standard_normal((9, 4))
        C = rng.standard_normal((9, 3))
        w = float(rng.uniform(0.01, 100.0))
        np.testing.assert_array_equal(
            stacked_ridge_solve([(A, C, 1.0)]),
            stacked_ridge_solve([(A, C, w)]),
        )

    @pytest.mark.parametrize("seed", SEEDS)
    def test_normal_equations_hold(self, seed):
        rng = make_rng(seed)
        blocks = [(rng.standard_normal((7, 4)), rng.standard_normal((7, 6)), 1.0),
                  (np.eye(4), rng.standard_normal((4, 6)), 0.01)]
        Z = stacked_ridge_solve(blocks)
        G = sum(w * A.T @ A for A, _, w in blocks)
        R = sum(w * A.T @ C for A, C, w in blocks)
        assert np.linalg.norm(G @ Z - R) / np.linalg.norm(R) < 1e-8

    def test_many_columns_threaded_is_identical(self, rng):
        A = rng.standard_normal((10, 6))
        C = rng.standard_normal((10, 700))
        blocks = [(A, C, 1.0), (np.eye(6), rng.standard_normal((6, 700)), 0.5)]
        np.testing.assert_array_equal(
            stacked_ridge_solve(blocks, threads=1),
            stacked_ridge_solve(blocks, threads=4),
        )

    def test_inconsistent_shapes(self):
        with pytest.raises(ShapeError):
            stacked_ridge_solve([(np.eye(3), np.ones((3, 2)), 1.0), (np.eye(4), np.ones((4, 2)), 1.0)])

    def test_empty(self):
        with pytest.raises(ShapeError):
            stacked_ridge_solve([])

    def test_singular(self):
        with pytest.raises(NumericError):
            stacked_ridge_solve([(np.zeros((3, 2)), np.ones((3, 2)), 1.0)])


class TestMaxEig:
    def test_diagonal(self):
        assert max_eig_sym(np.diag([1.0, 2.0, 3.0])) == pytest.approx(9.0, rel=1e-6)

    def test_identity(self):
        assert max_eig_sym(np.eye(6)) == pytest.approx(1.0, rel=1e-6)

    def test_against_eigendecomposition(self, rng):
        A = rng.standard_normal((10, 20))
        oracle = np.linalg.eigvalsh(A.T @ A).max()
        assert max_eig_sym(A) == pytest.approx(oracle, rel=1e-5)

    def test_deterministic(self, rng):
        A = rng.standard_normal((10, 20))
        assert max_eig_sym(A) == max_eig_sym(A)

    def test_zero_matrix(self):
        with pytest.raises(ValueError):
            max_eig_sym(np.zeros((3, 3)))
