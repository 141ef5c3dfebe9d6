"""
Finite-grid softmax models: distributions, displaced representations, L/N matrices.
"""
from .distributions import (
    apply_equivalence,
    assigned_labels,
    cond_log_probs,
    log_partition,
    logits,
    nll,
)
from .projections import alignment_matrix, build_projections, check_diversity, condition_number, displaced

__all__ = [
    "alignment_matrix",
    "apply_equivalence",
    "assigned_labels",
    "build_projections",
    "check_diversity",
    "cond_log_probs",
    "condition_number",
    "displaced",
    "log_partition",
    "logits",
    "nll",
]
