"""
Representational similarity: standardization, cross-covariance, PLS-SVD and CCA.
"""
import logging
from typing import List, Optional

import numpy as np
import scipy.linalg as la

from ...core.config import get_settings
from ...core.exceptions import DegenerateVarianceError, GridMismatchError, ModelTableError, SingularMatrixError
from ...models.reports import InteriorLemmaCheck, SimilarityReport
from ...models.samples import SampleMatrix, SvdResult

logger = logging.getLogger(__name__)


def _check_joint(z: SampleMatrix, w: SampleMatrix) -> None:
    if z.n_samples != w.n_samples:
        raise GridMismatchError(f"sample counts differ: {z.n_samples} vs {w.n_samples}")
    if not np.allclose(z.weights, w.weights, rtol=0.0, atol=1e-12):
        raise GridMismatchError("joint samples must share their weights")


def standardize(samples: SampleMatrix, tol: float = 1e-12) -> SampleMatrix:
    """Weighted zero-mean, unit-variance columns."""
    centered = samples.centered()
    var = samples.weights @ centered**2
    for component, value in enumerate(var):
        if not value > tol:
            raise DegenerateVarianceError(f"component {component} has zero variance", component)
    return SampleMatrix(centered / np.sqrt(var), samples.weights)


def cross_covariance(z: SampleMatrix, w: SampleMatrix) -> np.ndarray:
    """(Sigma_zw)_ij = Cov[z_i, w_j] under the shared sample weights."""
    _check_joint(z, w)
    return (z.centered() * z.weights[:, None]).T @ w.centered()


def _unit_orthogonal_to(candidates: np.ndarray, basis: List[np.ndarray]) -> np.ndarray:
    """First candidate column with a nonzero component outside span(basis), normalized."""
    for column in candidates.T:
        residual = column.copy()
        for vector in basis:
            residual -= (vector @ residual) * vector
        norm = np.linalg.norm(residual)
        if norm > 1e-8:
            return residual / norm
    raise SingularMatrixError("could not extend the singular basis")


def pls_svd(sigma: np.ndarray, rank: Optional[int] = None) -> SvdResult:
    """
    Iterative projection extraction from a cross-covariance matrix.

    Each round takes the top singular pair of the deflated matrix,
    C <- C - s u v^T. Signs are chosen so that every extracted covariance
    u^T C v is nonnegative and the largest entry of u is positive.
    """
    sigma = np.asarray(sigma, dtype=float)
    rank = rank or min(sigma.shape)
    residual = sigma.copy()
    lefts: List[np.ndarray] = []
    rights: List[np.ndarray] = []
    values: List[float] = []
    for _ in range(rank):
        U, s, Vt = la.svd(residual)
        u = _unit_orthogonal_to(U, lefts)
        v = _unit_orthogonal_to(Vt.T, rights)
        value = float(u @ residual @ v)
        if value < 0:
            v = -v
            value = -value
        pivot = np.argmax(np.abs(u))
        if u[pivot] < 0:
            u, v = -u, -v
        residual = residual - value * np.outer(u, v)
        lefts.append(u)
        rights.append(v)
        values.append(value)
    return SvdResult(left=np.column_stack(lefts), right=np.column_stack(rights), singular_values=np.array(values))


def svd_spectrum(z: SampleMatrix, w: SampleMatrix) -> np.ndarray:
    """Singular values of the standardized cross-covariance, nonincreasing."""
    return la.svdvals(cross_covariance(standardize(z), standardize(w)))


def m_svd(z: SampleMatrix, w: SampleMatrix) -> float:
    """Mean singular value of Sigma_{z'w'}, i.e. the mean PLS-SVD covariance."""
    return float(np.mean(svd_spectrum(z, w)))


def d_svd(z: SampleMatrix, w: SampleMatrix) -> float:
    """1 - m_svd."""
    return max(1.0 - m_svd(z, w), 0.0)


def recover_rotation(z: SampleMatrix, w: SampleMatrix) -> np.ndarray:
    """Orthonormal R = U V^T from the SVD of Sigma_{z'w'}; z' = R w' when d_svd(z, w) = 0."""
    U, _, Vt = la.svd(cross_covariance(standardize(z), standardize(w)))
    return U @ Vt


def _inverse_sqrt(cov: np.ndarray, tol: float) -> np.ndarray:
    evals, evecs = la.eigh(cov)
    if evals.min() <= tol * max(evals.max(), 1.0):
        raise SingularMatrixError(f"within-set covariance is singular (smallest eigenvalue {evals.min():.3g})")
    return evecs @ (evecs / np.sqrt(evals)).T


def m_cca(z: SampleMatrix, w: SampleMatrix, ridge: float = 0.0, tol: Optional[float] = None) -> float:
    """
    Mean canonical correlation: mean singular value of
    Sigma_zz^{-1/2} Sigma_zw Sigma_ww^{-1/2}.
    """
    tol = tol if tol is not None else get_settings().singular_tol
    _check_joint(z, w)
    czz = cross_covariance(z, z) + ridge * np.eye(z.dim)
    cww = cross_covariance(w, w) + ridge * np.eye(w.dim)
    czw = cross_covariance(z, w)
    whitened = _inverse_sqrt(czz, tol) @ czw @ _inverse_sqrt(cww, tol)
    return float(np.mean(la.svdvals(whitened)))


def linear_fit_residuals(z: SampleMatrix, w: SampleMatrix) -> np.ndarray:
    """
    Per-sample residual norms of the weighted least-squares fit w ~ B z + c.

    Zero-weight samples do not influence the fit but still get a residual.
    """
    _check_joint(z, w)
    if z.n_samples <= z.dim:
        raise ModelTableError(f"need more samples than dimensions, got s={z.n_samples}, M={z.dim}")
    design = np.column_stack([z.rows, np.ones(z.n_samples)])
    scale = np.sqrt(z.weights)[:, None]
    coef, _, rank, _ = la.lstsq(design * scale, w.rows * scale)
    if rank < design.shape[1]:
        raise SingularMatrixError(f"rank-deficient design: rank {rank} < {design.shape[1]}")
    return np.linalg.norm(w.rows - design @ coef, axis=1)


def interior_lemma_check(z: SampleMatrix, w: SampleMatrix, slack: float = 1e-9) -> InteriorLemmaCheck:
    """m_svd(z, w) >= 1 - sqrt(M * sum_l Var[z'_l - w'_l])."""
    zs, ws = standardize(z), standardize(w)
    spectrum = la.svdvals(cross_covariance(zs, ws))
    value = float(np.mean(spectrum))
    diff = zs.rows - ws.rows
    var = zs.weights @ (diff - zs.weights @ diff) ** 2
    lower = 1.0 - float(np.sqrt(z.dim * np.sum(var)))
    return InteriorLemmaCheck(m_svd=value, lower_bound=lower, holds=value >= lower - slack)


def similarity_report(z: SampleMatrix, w: SampleMatrix, with_cca: bool = True) -> SimilarityReport:
    spectrum = svd_spectrum(z, w)
    value = float(np.mean(spectrum))
    cca = None
    if with_cca:
        try:
            cca = m_cca(z, w)
        except SingularMatrixError as e:
            logger.warning(f"m_cca undefined: {e}")
    return SimilarityReport(
        m_svd=value,
        d_svd=max(1.0 - value, 0.0),
        singular_values=[float(s) for s in spectrum],
        m_cca=cca,
        n_samples=z.n_samples,
    )
