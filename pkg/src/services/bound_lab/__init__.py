"""
Error terms, the variance-correlation identity and the d_LLV to d_SVD bound verifier.
"""
from .error_terms import (
    Alignment,
    embedding_alignment,
    epsilon_x_matrix,
    epsilon_x_vector,
    epsilon_y_matrix,
    epsilon_y_vector,
    pair_context,
    unembedding_alignment,
    var_corr_identity,
)
from .verifier import projected_samples, verify_bound

__all__ = [
    "Alignment",
    "embedding_alignment",
    "epsilon_x_matrix",
    "epsilon_x_vector",
    "epsilon_y_matrix",
    "epsilon_y_vector",
    "pair_context",
    "projected_samples",
    "unembedding_alignment",
    "var_corr_identity",
    "verify_bound",
]
