"""
Conditional distributions of finite-grid softmax models.
"""
import logging
from typing import Optional

import numpy as np
import scipy.linalg as la
from scipy.special import logsumexp

from ...core.config import get_settings
from ...core.exceptions import ModelTableError, NonFiniteError, SingularMatrixError
from ...models.tables import CondLogProb, ModelTable, check_weights

logger = logging.getLogger(__name__)


def logits(model: ModelTable) -> np.ndarray:
    """f(x_i)^T g(y_j) for every grid cell."""
    values = model.embeddings @ model.unembeddings.T
    if not np.all(np.isfinite(values)):
        i, j = (int(v) for v in np.argwhere(~np.isfinite(values))[0])
        raise NonFiniteError(f"non-finite logit at (input {i}, label {j})", index=(i, j))
    return values


def log_partition(model: ModelTable) -> np.ndarray:
    """log Z(x) for every input."""
    return logsumexp(logits(model), axis=1)


def cond_log_probs(model: ModelTable, weights: Optional[np.ndarray] = None) -> CondLogProb:
    """
    Conditional log-probabilities log p(y|x) on the model's grid.

    Args:
        model: Model table
        weights: Empirical input weights p_D(x); the table's own weights when omitted

    Returns:
        CondLogProb with rows normalized by a max-subtracted log-sum-exp
    """
    if weights is None:
        weights = model.weights()
    weights = check_weights(weights, model.n)
    values = logits(model)
    logp = values - logsumexp(values, axis=1, keepdims=True)
    return CondLogProb(logp=logp, input_weights=weights)


def nll(model: ModelTable, labels: np.ndarray, weights: Optional[np.ndarray] = None) -> float:
    """
    Weighted negative log-likelihood E[-log p(y|x)] with one label per input.

    Args:
        model: Model table
        labels: Assigned label index for every input
        weights: Empirical input weights; the table's own weights when omitted
    """
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (model.n,):
        raise ModelTableError(f"need exactly one label per input, got shape {labels.shape}")
    if labels.min() < 0 or labels.max() >= model.k:
        raise ModelTableError("label index out of range")
    p = cond_log_probs(model, weights)
    value = float(p.input_weights @ -p.logp[np.arange(model.n), labels])
    return max(value, 0.0)


def assigned_labels(model: ModelTable) -> np.ndarray:
    """Most probable label for every input, used as the one-label-per-input dataset."""
    return np.argmax(logits(model), axis=1)


def apply_equivalence(model: ModelTable, A: np.ndarray, condition_cap: Optional[float] = None) -> ModelTable:
    """
    Linearly equivalent model f' = A^{-1} f, g' = A^T g.

    Inner products f'(x)^T g'(y) equal f(x)^T g(y), so the induced
    conditional distribution is unchanged and g'_0 = A^T g_0.
    """
    cap = condition_cap if condition_cap is not None else get_settings().condition_cap
    A = np.asarray(A, dtype=float)
    if A.shape != (model.dim, model.dim):
        raise ModelTableError(f"A must be {model.dim}x{model.dim}, got {A.shape}")
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond >= cap:
        raise SingularMatrixError(f"equivalence matrix is singular (condition number {cond:.3g})")
    embeddings = la.solve(A, model.embeddings.T).T
    unembeddings = model.unembeddings @ A
    logger.debug(f"Applied equivalence with condition number {cond:.3g}")
    return ModelTable(embeddings, unembeddings, model.input_ids, model.label_ids, model.input_weights)
