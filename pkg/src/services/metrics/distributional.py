"""
Distances between conditional distributions: d_KL, the psi scale terms and d_LLV.
"""
import logging
from typing import List, Optional

import numpy as np

from ...core.config import get_settings
from ...core.exceptions import AssumptionViolationError, GridMismatchError, LlvkitError
from ...models.reports import Diagnostic, LlvReport
from ...models.samples import PsiTerms
from ...models.tables import CondLogProb, PivotConfig

logger = logging.getLogger(__name__)


def weighted_std(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Population standard deviation of each column under the given weights."""
    mean = weights @ values
    var = weights @ (values - mean) ** 2
    return np.sqrt(np.maximum(var, 0.0))


def uniform_std(values: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.sqrt(np.maximum(np.var(values, axis=axis), 0.0))


def check_same_grid(p: CondLogProb, q: CondLogProb) -> None:
    if p.logp.shape != q.logp.shape:
        raise GridMismatchError(f"grids differ: {p.logp.shape} vs {q.logp.shape}")
    if not np.allclose(p.input_weights, q.input_weights, rtol=0.0, atol=1e-12):
        raise GridMismatchError("input weights differ between the compared distributions")


def d_kl(p: CondLogProb, q: CondLogProb) -> float:
    """Expected conditional KL divergence sum_x w(x) KL(p(.|x) || q(.|x))."""
    check_same_grid(p, q)
    per_input = np.sum(p.probs * (p.logp - q.logp), axis=1)
    return max(float(p.input_weights @ per_input), 0.0)


def psi_terms(p: CondLogProb, pivots: PivotConfig, psi_tol: Optional[float] = None) -> PsiTerms:
    """
    psi_x(y) = std_x[log p(y|x) - log p(y0|x)] for y in Y_LLV without y0, and
    psi_y(x_j) = std_y[log p(y|x_j) - log p(y|x0)] over y in Y_LLV, uniform.

    Vanished entries, and pivot inputs outside the support of the input
    distribution, are recorded as violations of the positivity assumption.
    """
    tol = psi_tol if psi_tol is not None else get_settings().psi_tol
    dim = len(pivots.x_llv)
    pivots.check_against(p.n, p.k, dim)
    labels = pivots.psi_labels
    y0, x0 = pivots.y0_index, pivots.x0_index

    ratios = p.logp[:, labels] - p.logp[:, [y0]]
    psi_x = weighted_std(ratios, p.input_weights)

    label_set = pivots.y_llv
    shifts = p.logp[np.ix_(pivots.x_llv, label_set)] - p.logp[x0, label_set]
    psi_y = uniform_std(shifts, axis=1)

    violations: List[Diagnostic] = []
    for label, value in zip(labels, psi_x):
        if value <= tol:
            violations.append(
                Diagnostic(
                    level="error",
                    category="assumption",
                    message=f"psi_x vanished for label {label} against pivot label {y0}",
                    field=f"psi_x[{label}]",
                    suggestion="choose another pivot label or excluded label",
                )
            )
    for index, value in zip(pivots.x_llv, psi_y):
        if value <= tol:
            violations.append(
                Diagnostic(
                    level="error",
                    category="assumption",
                    message=f"psi_y vanished for input {index} against pivot input {x0}",
                    field=f"psi_y[{index}]",
                    suggestion="choose another input set",
                )
            )
    for index in [x0, *pivots.x_llv]:
        if p.input_weights[index] <= 0:
            violations.append(
                Diagnostic(
                    level="error",
                    category="assumption",
                    message=f"pivot input {index} has zero input weight",
                    field=f"p_D[{index}]",
                    suggestion="pick pivot inputs with positive weight",
                )
            )
    return PsiTerms(
        psi_x=psi_x,
        psi_y=psi_y,
        psi_x_labels=tuple(labels),
        psi_y_inputs=tuple(pivots.x_llv),
        violations=violations,
    )


def llv_label_term(p: CondLogProb, q: CondLogProb, psi_p: np.ndarray, psi_q: np.ndarray, pivots: PivotConfig) -> float:
    """t1: psi_x-normalized log-likelihood differences, varied over inputs."""
    labels = pivots.psi_labels
    y0 = pivots.y0_index
    own = p.logp[:, labels] / psi_p - q.logp[:, labels] / psi_q
    pivot = p.logp[:, [y0]] / psi_p - q.logp[:, [y0]] / psi_q
    w = p.input_weights
    return float(max(weighted_std(own, w).max(), weighted_std(pivot, w).max()))


def llv_input_term(p: CondLogProb, q: CondLogProb, psi_p: np.ndarray, psi_q: np.ndarray, pivots: PivotConfig) -> float:
    """t2: psi_y-normalized log-likelihood differences, varied over Y_LLV."""
    labels = pivots.y_llv
    x0 = pivots.x0_index
    rows = pivots.x_llv
    own = p.logp[np.ix_(rows, labels)] / psi_p[:, None] - q.logp[np.ix_(rows, labels)] / psi_q[:, None]
    pivot = p.logp[x0, labels][None, :] / psi_p[:, None] - q.logp[x0, labels][None, :] / psi_q[:, None]
    return float(max(uniform_std(own, axis=1).max(), uniform_std(pivot, axis=1).max()))


def diversity_matrix(p: CondLogProb, pivots: PivotConfig, dim: int) -> np.ndarray:
    """
    Q_ji = [log p(y_i|x_j) - log p(y0|x_j)] - [log p(y_i|x0) - log p(y0|x0)].

    Q equals N^T L, so it is invertible exactly when both L and N are.
    """
    labels = pivots.projection_labels(dim)
    y0, x0 = pivots.y0_index, pivots.x0_index
    ratios = p.logp[:, labels] - p.logp[:, [y0]]
    return ratios[pivots.x_llv] - ratios[x0]


def well_conditioned(matrix: np.ndarray, cap: float) -> bool:
    cond = np.linalg.cond(matrix)
    return bool(np.isfinite(cond) and cond < cap)


def diversity_diagnostics(
    p: CondLogProb, q: CondLogProb, pivots: PivotConfig, condition_cap: Optional[float] = None
) -> List[Diagnostic]:
    """Warnings for either model whose diversity matrix is singular under the pivots."""
    cap = condition_cap if condition_cap is not None else get_settings().condition_cap
    dim = len(pivots.x_llv)
    if len(pivots.psi_labels) < dim:
        return [
            Diagnostic(
                level="info",
                category="diversity",
                message=f"only {len(pivots.psi_labels)} labels besides y0 for M={dim}; diversity not checked",
            )
        ]
    diagnostics = []
    for name, dist in (("p", p), ("q", q)):
        if not well_conditioned(diversity_matrix(dist, pivots, dim), cap):
            diagnostics.append(
                Diagnostic(
                    level="warning",
                    category="diversity",
                    message=f"diversity matrix of {name} is singular under the chosen pivots",
                    field=f"Q[{name}]",
                    suggestion="select pivots with require_diversity=True",
                )
            )
    return diagnostics


def d_llv(p: CondLogProb, q: CondLogProb, pivots: PivotConfig, lam: Optional[float] = None) -> LlvReport:
    """
    Log-likelihood variance distance max{t1, t2, lam*t3, lam*t4} on shared pivots.

    Vanished psi terms and zero-weight pivot inputs are hard errors; a
    singular diversity matrix is reported in `violations`.

    Raises:
        AssumptionViolationError: when a psi term vanishes for either model
    """
    lam = lam if lam is not None else get_settings().default_lambda
    if not lam > 0:
        raise LlvkitError(f"lambda must be positive, got {lam}")
    check_same_grid(p, q)
    psi_p = psi_terms(p, pivots)
    psi_q = psi_terms(q, pivots)
    violations = [*psi_p.violations, *psi_q.violations]
    if violations:
        fields = ", ".join(dict.fromkeys(v.field for v in violations))
        raise AssumptionViolationError(f"pivot assumptions violated: {fields}", violations)

    t1 = llv_label_term(p, q, psi_p.psi_x, psi_q.psi_x, pivots)
    t2 = llv_input_term(p, q, psi_p.psi_y, psi_q.psi_y, pivots)
    t3 = float(np.max(np.abs(psi_p.psi_x - psi_q.psi_x)))
    t4 = float(np.max(np.abs(psi_p.psi_y - psi_q.psi_y)))
    value = max(t1, t2, lam * t3, lam * t4)
    return LlvReport(
        t1=t1, t2=t2, t3=t3, t4=t4, lam=lam, value=value, pivots=pivots, violations=diversity_diagnostics(p, q, pivots)
    )
