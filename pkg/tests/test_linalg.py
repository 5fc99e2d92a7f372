import numpy as np
import pytest

from walshprod import operator_norm


def rand(shape, seed):
    return np.random.Generator(np.random.Philox(key=seed)).normal(size=shape)


class TestOperatorNorm:
    def test_diagonal(self):
        res = operator_norm(np.diag([3.0, 1.0]))
        assert res.value == pytest.approx(3.0, rel=1e-10)
        assert res.converged

    def test_zero_matrix(self):
        res = operator_norm(np.zeros((3, 4)))
        assert res.value == 0.0 and res.converged

    def test_nilpotent(self):
        res = operator_norm(np.array([[0.0, 2.0], [0.0, 0.0]]))
        assert res.value == pytest.approx(2.0, rel=1e-10)

    def test_scaled_identity(self):
        res = operator_norm(0.1875 * np.eye(6))
        assert res.value == pytest.approx(0.1875, rel=1e-12)

    def test_all_ones_start_in_nullspace(self):
        # ones is annihilated; the restart from e_1 must recover the norm 2.
        mat = np.array([[1.0, -1.0], [-1.0, 1.0]])
        res = operator_norm(mat)
        assert res.value == pytest.approx(2.0, rel=1e-10)

    @pytest.mark.parametrize("shape,seed", [((5, 5), 0), ((8, 3), 1), ((3, 9), 2), ((12, 12), 3)])
    def test_matches_svd(self, shape, seed):
        mat = rand(shape, seed)
        res = operator_norm(mat)
        assert res.converged
        assert res.value == pytest.approx(np.linalg.norm(mat, 2), rel=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_transpose_invariance(self, seed):
        mat = rand((6, 4), seed)
        a = operator_norm(mat).value
        b = operator_norm(mat.T).value
        assert a == pytest.approx(b, rel=1e-10)

    @pytest.mark.parametrize("c", [0.0, 0.5, -2.0, 10.0])
    def test_absolute_homogeneity(self, c):
        mat = rand((5, 5), 7)
        base = operator_norm(mat).value
        assert operator_norm(c * mat).value == pytest.approx(abs(c) * base, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_column_norm_and_l1_linf_bounds(self, seed):
        mat = rand((7, 5), seed + 20)
        value = operator_norm(mat).value
        col_norms = np.linalg.norm(mat, axis=0).max()
        l1 = np.abs(mat).sum(axis=0).max()
        linf = np.abs(mat).sum(axis=1).max()
        assert value >= col_norms - 1e-9
        assert value <= np.sqrt(l1 * linf) + 1e-9

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            operator_norm(np.array([[1.0, np.nan]]))
        with pytest.raises(ValueError):
            operator_norm(np.array([[np.inf, 1.0]]))

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError):
            operator_norm(np.eye(2), tol=0.0)

    def test_iteration_metadata(self):
        res = operator_norm(rand((6, 6), 5))
        assert res.iterations >= 2
        assert res.residual <= 1e-12
