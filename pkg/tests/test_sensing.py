import numpy as np
import pytest

from conftest import SEEDS, make_rng
from lcae.sensing import (
    SensingMatrix,
    compress,
    generate,
    load_sensing,
    poor_mans_inverse,
    save_sensing,
    sensing_for_ratio,
)
from lcae.utils.errors import ConfigError, DataFormatError, NumericError, ShapeError


class TestGenerate:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_structure(self, seed):
        phi = generate(125, 250, 2, seed)
        dense = phi.to_dense()
        assert dense.shape == (125, 250)
        assert set(np.unique(dense).tolist()) <= {0.0, 1.0}
        np.testing.assert_array_equal(dense.sum(axis=0), np.full(250, 2.0))
        assert dense.sum(axis=1).min() >= 1
        np.testing.assert_array_equal(phi.row_counts(), dense.sum(axis=1))

    def test_same_seed_same_matrix(self):
        assert generate(63, 250, 2, 7) == generate(63, 250, 2, 7)

    def test_different_seed_different_matrix(self):
        assert generate(63, 250, 2, 7) != generate(63, 250, 2, 8)

    @pytest.mark.parametrize("seed", range(10))
    def test_square_single_one_is_permutation(self, seed):
        dense = generate(4, 4, 1, seed).to_dense()
        np.testing.assert_array_equal(dense.sum(axis=0), np.ones(4))
        np.testing.assert_array_equal(dense.sum(axis=1), np.ones(4))

    def test_d_equal_m_fills_every_column(self):
        dense = generate(3, 10, 3, 0).to_dense()
        np.testing.assert_array_equal(dense, np.ones((3, 10)))

    @pytest.mark.parametrize("m,n,d", [(5, 10, 6), (11, 10, 2), (5, 10, 0), (0, 10, 1)])
    def test_infeasible(self, m, n, d):
        with pytest.raises(ConfigError):
            generate(m, n, d, 0)


class TestSensingForRatio:
    @pytest.mark.parametrize("ratio,d,m", [(0.5, 2, 125), (0.25, 2, 63), (1.0, 8, 250), (0.004, 2, 2)])
    def test_measurement_count(self, ratio, d, m):
        assert sensing_for_ratio(250, ratio, d, 0).m == m

    def test_high_ratio_with_two_ones_leaves_empty_rows(self):
        with pytest.raises(NumericError, match="empty rows"):
            sensing_for_ratio(250, 0.9, 2, 0)

    def test_high_ratio_with_more_ones_per_column(self):
        phi = sensing_for_ratio(250, 0.9, 8, 0)
        assert phi.m == 225
        assert phi.row_counts().min() > 0

    @pytest.mark.parametrize("ratio", [0.0, -0.1, 1.5])
    def test_bad_ratio(self, ratio):
        with pytest.raises(ConfigError):
            sensing_for_ratio(250, ratio)


class TestSensingMatrix:
    def test_repeated_row_index(self):
        with pytest.raises(ShapeError, match="repeats"):
            SensingMatrix(m=3, n=2, ones_per_col=2, seed=0, rows=np.array([[0, 0], [1, 2]]))

    def test_row_index_out_of_range(self):
        with pytest.raises(ShapeError):
            SensingMatrix(m=3, n=2, ones_per_col=1, seed=0, rows=np.array([[0], [3]]))

    def test_wrong_structure_shape(self):
        with pytest.raises(ShapeError):
            SensingMatrix(m=3, n=4, ones_per_col=1, seed=0, rows=np.zeros((3, 1)))

    def test_rows_are_read_only(self):
        phi = generate(4, 8, 2, 0)
        with pytest.raises(ValueError):
            phi.rows[0, 0] = 3


class TestProducts:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_compress_matches_dense(self, seed):
        rng = make_rng(seed)
        phi = generate(20, 50, 2, seed)
        Z = rng.standard_normal((50, 7))
        np.testing.assert_allclose(compress(phi, Z), phi.to_dense() @ Z, atol=1e-12)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_poor_mans_inverse_matches_dense(self, seed):
        rng = make_rng(seed)
        phi = generate(20, 50, 2, seed)
        Z = rng.standard_normal((50, 7))
        dense = phi.to_dense()
        np.testing.assert_allclose(
            poor_mans_inverse(phi, compress(phi, Z)), dense.T @ dense @ Z, atol=1e-12
        )

    @pytest.mark.parametrize("seed", SEEDS)
    def test_compress_is_linear(self, seed):
        rng = make_rng(seed)
        phi = generate(20, 40, 2, seed)
        x, y = rng.standard_normal((40, 3)), rng.standard_normal((40, 3))
        a, b = rng.standard_normal(2)
        np.testing.assert_allclose(compress(phi, a * x + b * y), a * compress(phi, x) + b * compress(phi, y), atol=1e-12)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_inverse_is_the_adjoint(self, seed):
        rng = make_rng(seed)
        phi = generate(20, 40, 2, seed)
        x = rng.standard_normal((40, 1))
        y = rng.standard_normal((20, 1))
        lhs = float(np.sum(compress(phi, x) * y))
        rhs = float(np.sum(x * poor_mans_inverse(phi, y)))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_single_window_vector(self):
        phi = generate(3, 6, 2, 1)
        assert compress(phi, np.arange(6.0)).shape == (3, 1)

    def test_identity_sensing_is_lossless(self):
        phi = SensingMatrix(m=5, n=5, ones_per_col=1, seed=0, rows=np.arange(5)[:, None])
        Z = np.arange(10.0).reshape(5, 2)
        np.testing.assert_array_equal(poor_mans_inverse(phi, compress(phi, Z)), Z)

    def test_compress_shape_mismatch(self):
        with pytest.raises(ShapeError):
            compress(generate(3, 6, 2, 1), np.ones((5, 2)))

    def test_inverse_shape_mismatch(self):
        with pytest.raises(ShapeError):
            poor_mans_inverse(generate(3, 6, 2, 1), np.ones((6, 2)))


class TestSensingFile:
    def test_save_then_load(self, tmp_path):
        phi = generate(63, 250, 2, 42)
        path = tmp_path / "phi.txt"
        save_sensing(path, phi)
        assert load_sensing(path) == phi

    def test_file_layout(self, tmp_path):
        phi = SensingMatrix(m=2, n=3, ones_per_col=1, seed=9, rows=np.array([[1], [0], [1]]))
        path = tmp_path / "phi.txt"
        save_sensing(path, phi)
        assert path.read_text() == "2 3 1 9\n1\n0\n1\n"

    def test_bad_header(self, tmp_path):
        path = tmp_path / "phi.txt"
        path.write_text("2 3 x 9\n")
        with pytest.raises(DataFormatError) as exc:
            load_sensing(path)
        assert exc.value.line == 1

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "phi.txt"
        path.write_text("2 3 1 9\n1\n0\n")
        with pytest.raises(DataFormatError):
            load_sensing(path)

    def test_wrong_index_count(self, tmp_path):
        path = tmp_path / "phi.txt"
        path.write_text("2 3 1 9\n1\n0 1\n1\n")
        with pytest.raises(DataFormatError) as exc:
            load_sensing(path)
        assert exc.value.line == 3

    def test_index_out_of_range(self, tmp_path):
        path = tmp_path / "phi.txt"
        path.write_text("2 3 1 9\n1\n5\n1\n")
        with pytest.raises(DataFormatError):
            load_sensing(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "phi.txt"
        path.write_text("")
        with pytest.raises(DataFormatError):
            load_sensing(path)
