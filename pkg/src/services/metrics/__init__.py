"""
Distributional distances (d_KL, d_LLV) and representational similarities (m_SVD, m_CCA).
"""
from .distributional import check_same_grid, d_kl, d_llv, diversity_diagnostics, diversity_matrix, psi_terms, weighted_std
from .pivot_selection import (
    LabelPivotScore,
    score_group_label_pivots,
    score_label_pivots,
    select_group_pivots,
    select_pivots,
)
from .representational import (
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

__all__ = [
    "LabelPivotScore",
    "check_same_grid",
    "cross_covariance",
    "d_kl",
    "d_llv",
    "d_svd",
    "diversity_diagnostics",
    "diversity_matrix",
    "interior_lemma_check",
    "linear_fit_residuals",
    "m_cca",
    "m_svd",
    "pls_svd",
    "psi_terms",
    "recover_rotation",
    "score_group_label_pivots",
    "score_label_pivots",
    "select_group_pivots",
    "select_pivots",
    "similarity_report",
    "standardize",
    "svd_spectrum",
    "weighted_std",
]
