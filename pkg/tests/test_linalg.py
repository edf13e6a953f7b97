import logging

import numpy as np
import pytest
import scipy.sparse

from core.errors import DimensionMismatchError, HermitianViolationError, InvalidParameterError
from core.linalg import block_of, flatten_blocks, lambda_max_hermitian, sigma_max


def _spiked(rng, n, strength=5.0):
    """Rank-one spike plus small noise: a decisive singular gap for power iteration"""
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    noise = 0.01 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
    return strength * np.outer(u, v.conj()) + noise


class TestSigmaMax:
    def test_diagonal(self):
        assert sigma_max(np.diag([3.0, 1.0])).value == pytest.approx(3.0, abs=1e-14)

    def test_all_ones(self):
        assert sigma_max(np.ones((2, 2))).value == pytest.approx(2.0, abs=1e-14)

    def test_power_method_on_diagonal(self):
        result = sigma_max(np.diag([3.0, 1.0]), method="power")
        assert result.converged
        assert result.value == pytest.approx(3.0, rel=1e-10)
        assert result.residual <= 1e-11

    def test_matches_svd_oracle(self):
        rng = np.random.default_rng(7)
        for k in range(100):
            rows, cols = rng.integers(1, 201, size=2)
            M = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
            expected = np.linalg.svd(M, compute_uv=False)[0]
            assert sigma_max(M).value == pytest.approx(expected, rel=1e-10)

    def test_power_iteration_matches_svd_with_gap(self):
        rng = np.random.default_rng(11)
        for n in (50, 100, 200):
            M = _spiked(rng, n)
            expected = np.linalg.svd(M, compute_uv=False)[0]
            result = sigma_max(M, method="power")
            assert result.converged
            assert result.value == pytest.approx(expected, rel=1e-10)

    def test_adjoint_invariance(self, rng):
        M = rng.standard_normal((30, 17)) + 1j * rng.standard_normal((30, 17))
        assert sigma_max(M).value == pytest.approx(sigma_max(M.conj().T).value, rel=1e-12)

    def test_principal_submatrix_monotone(self, rng):
        M = rng.standard_normal((40, 40))
        assert sigma_max(M[:25, :25]).value <= sigma_max(M).value + 1e-12

    def test_deterministic(self, rng):
        M = _spiked(rng, 80)
        first = sigma_max(M, method="power")
        second = sigma_max(M, method="power")
        assert first == second

    def test_sparse_input(self):
        M = scipy.sparse.diags([1.0, 4.0, 2.0]).tocsr()
        assert sigma_max(M).value == pytest.approx(4.0)
        assert sigma_max(M, method="power").value == pytest.approx(4.0, rel=1e-10)

    def test_empty_matrix(self):
        assert sigma_max(np.zeros((0, 3))).value == 0.0

    def test_zero_matrix_power(self):
        assert sigma_max(np.zeros((5, 5)), method="power").value == 0.0

    def test_non_convergence_is_flagged(self, caplog):
        with caplog.at_level(logging.WARNING):
            result = sigma_max(np.diag([3.0, 1.0]), method="power", max_iters=1)
        assert not result.converged
        assert result.iters == 1
        assert "did not converge" in caplog.text

    def test_rejects_bad_tolerance(self):
        with pytest.raises(InvalidParameterError):
            sigma_max(np.eye(2), tol=0.0)

    def test_rejects_unknown_method(self):
        with pytest.raises(InvalidParameterError):
            sigma_max(np.eye(2), method="lanczos")

    def test_rejects_non_matrix(self):
        with pytest.raises(DimensionMismatchError):
            sigma_max(np.ones(3))

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidParameterError):
            sigma_max(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestLambdaMaxHermitian:
    def test_diagonal(self):
        assert lambda_max_hermitian(np.diag([0.0, 5.0, 1.0])).value == pytest.approx(5.0)

    def test_homogeneity(self, rng):
        A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
        H = A @ A.conj().T
        base = lambda_max_hermitian(H).value
        assert lambda_max_hermitian(3.5 * H).value == pytest.approx(3.5 * base, rel=1e-12)

    def test_power_method_psd(self, rng):
        A = _spiked(rng, 60)
        H = A @ A.conj().T
        expected = np.linalg.eigvalsh(0.5 * (H + H.conj().T))[-1]
        result = lambda_max_hermitian(H, method="power")
        assert result.converged
        assert result.value == pytest.approx(expected, rel=1e-10)

    def test_power_method_with_negative_diagonal(self):
        H = np.diag([-4.0, 2.0, 1.0])
        assert lambda_max_hermitian(H, method="power").value == pytest.approx(2.0, rel=1e-9)

    def test_small_defect_is_symmetrized(self):
        H = np.array([[2.0, 1.0], [1.0 + 1e-13, 2.0]])
        assert lambda_max_hermitian(H).value == pytest.approx(3.0, rel=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(HermitianViolationError):
            lambda_max_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatchError):
            lambda_max_hermitian(np.ones((2, 3)))


class TestBlocks:
    def test_flatten_layout(self):
        blocks = np.arange(2 * 3 * 2 * 2).reshape(2, 3, 2, 2)
        M = flatten_blocks(blocks)
        assert M.shape == (4, 6)
        for r in range(2):
            for c in range(3):
                assert np.array_equal(block_of(M, r, c, 2), blocks[r, c])

    def test_flatten_rejects_wrong_rank(self):
        with pytest.raises(DimensionMismatchError):
            flatten_blocks(np.ones((2, 2, 2)))
