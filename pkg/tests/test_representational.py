"""
Tests for standardization, PLS-SVD, m_SVD/d_SVD and m_CCA.
"""
import numpy as np
import pytest
import scipy.linalg as la

from src.core.exceptions import DegenerateVarianceError, GridMismatchError, SingularMatrixError
from src.models.samples import SampleMatrix
from src.services.metrics import (
    cross_covariance,
    d_svd,
    interior_lemma_check,
    linear_fit_residuals,
    m_cca,
    m_svd,
    pls_svd,
    recover_rotation,
    similarity_report,
    standardize,
    svd_spectrum,
)


def whitened(s: int = 500, dim: int = 2, seed: int = 0) -> SampleMatrix:
    """Samples whose weighted covariance is exactly the identity."""
    rows = np.random.default_rng(seed).normal(size=(s, dim))
    rows -= rows.mean(axis=0)
    cov = rows.T @ rows / s
    evals, evecs = la.eigh(cov)
    return SampleMatrix.of(rows @ evecs @ np.diag(evals**-0.5) @ evecs.T)


def rotation(angle: float) -> np.ndarray:
    return np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])


class TestStandardize:
    def test_two_values(self):
        z = standardize(SampleMatrix.of(np.array([[0.0], [2.0]])))
        assert z.rows[:, 0] == pytest.approx([-1.0, 1.0])

    def test_weighted_moments(self):
        rng = np.random.default_rng(1)
        weights = rng.uniform(size=50)
        z = standardize(SampleMatrix(rng.normal(size=(50, 3)), weights / weights.sum()))
        assert np.allclose(z.mean(), 0.0, atol=1e-12)
        assert np.allclose(z.weights @ z.rows**2, 1.0)

    def test_constant_component(self):
        rows = np.column_stack([np.arange(5.0), np.full(5, 2.0)])
        with pytest.raises(DegenerateVarianceError) as info:
            standardize(SampleMatrix.of(rows))
        assert info.value.component == 1


class TestCrossCovariance:
    def test_matches_numpy(self):
        rng = np.random.default_rng(2)
        z = SampleMatrix.of(rng.normal(size=(200, 2)))
        w = SampleMatrix.of(rng.normal(size=(200, 3)))
        expected = np.cov(z.rows.T, w.rows.T, bias=True)[:2, 2:]
        assert np.allclose(cross_covariance(z, w), expected)

    def test_sample_count_mismatch(self):
        with pytest.raises(GridMismatchError):
            cross_covariance(whitened(100), whitened(101))


class TestPlsSvd:
    def test_diagonal(self):
        result = pls_svd(np.diag([3.0, 1.0]))
        assert result.singular_values == pytest.approx([3.0, 1.0])

    @pytest.mark.parametrize("seed", range(100))
    def test_matches_svd(self, seed):
        dim = 2 + seed % 4
        sigma = np.random.default_rng(seed).normal(size=(dim, dim))
        result = pls_svd(sigma)
        assert np.allclose(result.singular_values, la.svdvals(sigma), atol=1e-9)
        assert np.allclose(result.left.T @ result.left, np.eye(dim), atol=1e-9)
        assert np.allclose(result.right.T @ result.right, np.eye(dim), atol=1e-9)
        assert np.allclose(result.reconstruct(), sigma, atol=1e-9)

    def test_covariances_nonnegative(self):
        sigma = -np.diag([2.0, 0.5])
        result = pls_svd(sigma)
        for i in range(2):
            assert result.left[:, i] @ sigma @ result.right[:, i] >= 0


class TestMsvd:
    def test_self_similarity(self):
        z = SampleMatrix.of(np.random.default_rng(3).normal(size=(300, 3)) @ np.array([[1, 0.5, 0], [0, 1, 0.2], [0, 0, 2]]))
        assert m_svd(z, z) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("seed", range(100))
    def test_orthonormal_invariance_for_whitened_samples(self, seed):
        rng = np.random.default_rng(seed)
        z = whitened(seed=seed)
        Q = rotation(rng.uniform(0, 2 * np.pi)) @ np.diag([1.0, rng.choice([-1.0, 1.0])])
        w = SampleMatrix.of(z.rows @ Q.T + rng.normal(scale=5.0, size=2))
        assert d_svd(z, w) < 1e-9
        assert np.allclose(recover_rotation(z, w), Q.T, atol=1e-8)

    def test_reflection(self):
        z = whitened(seed=4)
        w = SampleMatrix.of(z.rows @ np.diag([1.0, -1.0]))
        assert d_svd(z, w) < 1e-9

    def test_non_orthonormal_map_is_penalized(self):
        z = whitened(seed=5)
        w = SampleMatrix.of(z.rows @ np.array([[1.0, 0.0], [1.0, 1.0]]).T)
        assert d_svd(z, w) == pytest.approx(1.0 - (1.3066 + 0.5412) / 2, abs=1e-3)
        assert m_cca(z, w) == pytest.approx(1.0)

    def test_spectrum_nonincreasing(self):
        rng = np.random.default_rng(6)
        z = SampleMatrix.of(rng.normal(size=(400, 3)))
        w = SampleMatrix.of(z.rows @ rng.normal(size=(3, 3)) + rng.normal(size=(400, 3)))
        spectrum = svd_spectrum(z, w)
        assert np.all(np.diff(spectrum) <= 1e-12)
        assert 0.0 <= d_svd(z, w) <= 1.0


class TestMcca:
    @pytest.mark.parametrize("seed", range(5))
    def test_affine_images(self, seed):
        rng = np.random.default_rng(seed)
        z = SampleMatrix.of(rng.normal(size=(300, 2)))
        A = rng.normal(size=(2, 2)) + 2 * np.eye(2)
        w = SampleMatrix.of(z.rows @ A.T + rng.normal(size=2))
        assert m_cca(z, w) == pytest.approx(1.0, abs=1e-9)

    def test_independent_samples(self):
        rng = np.random.default_rng(7)
        z = SampleMatrix.of(rng.normal(size=(10_000, 2)))
        w = SampleMatrix.of(rng.normal(size=(10_000, 2)))
        assert m_cca(z, w) < 0.1

    def test_singular_within_set_covariance(self):
        rows = np.random.default_rng(8).normal(size=(50, 1))
        z = SampleMatrix.of(np.column_stack([rows, 2 * rows]))
        with pytest.raises(SingularMatrixError):
            m_cca(z, whitened(50))
        assert m_cca(z, whitened(50), ridge=1e-3) < 1.0

    def test_report_leaves_cca_empty_when_singular(self):
        rows = np.random.default_rng(9).normal(size=(60, 1))
        z = SampleMatrix.of(np.column_stack([rows, 2 * rows]))
        report = similarity_report(z, z)
        assert report.m_cca is None
        assert report.m_svd == pytest.approx(1.0)
        assert report.singular_values == pytest.approx([2.0, 0.0], abs=1e-9)
        assert report.n_samples == 60


class TestLinearFit:
    def test_exact_affine_map(self):
        z = SampleMatrix.of(np.random.default_rng(11).normal(size=(40, 2)))
        w = SampleMatrix.of(2 * z.rows + 1)
        assert np.max(linear_fit_residuals(z, w)) < 1e-9

    def test_nonlinear_map_leaves_residual(self):
        angles = np.linspace(0, 2 * np.pi, 60, endpoint=False)
        z = SampleMatrix.of(np.column_stack([np.cos(angles), np.sin(angles)]))
        w = SampleMatrix.of(np.column_stack([np.cos(2 * angles), np.sin(2 * angles)]))
        assert np.max(linear_fit_residuals(z, w)) > 0.5


class TestInteriorLemma:
    @pytest.mark.parametrize("noise", [0.0, 0.1, 0.5, 2.0])
    def test_lower_bound_holds(self, noise):
        rng = np.random.default_rng(12)
        z = SampleMatrix.of(rng.normal(size=(500, 2)))
        w = SampleMatrix.of(z.rows + noise * rng.normal(size=(500, 2)))
        check = interior_lemma_check(z, w)
        assert check.holds
        assert check.m_svd >= check.lower_bound - 1e-9

    def test_identical_samples(self):
        z = whitened(seed=13)
        check = interior_lemma_check(z, z)
        assert check.lower_bound == pytest.approx(1.0)
        assert check.m_svd == pytest.approx(1.0)
