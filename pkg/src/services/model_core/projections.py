"""
Displaced representations, the diversity condition and the L/N matrices.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as la

from ...core.config import get_settings
from ...core.exceptions import ProjectionError
from ...models.reports import DiversityCheck
from ...models.tables import ModelTable, PivotConfig, ProjectionMatrices

logger = logging.getLogger(__name__)


def _cap(condition_cap: Optional[float]) -> float:
    return condition_cap if condition_cap is not None else get_settings().condition_cap


def condition_number(matrix: np.ndarray) -> float:
    """2-norm condition number; inf for singular or empty matrices."""
    if matrix.size == 0 or matrix.shape[0] != matrix.shape[1]:
        return float("inf")
    cond = float(np.linalg.cond(matrix))
    return cond if np.isfinite(cond) else float("inf")


def displaced(model: ModelTable, pivots: PivotConfig) -> Tuple[np.ndarray, np.ndarray]:
    """f0 = f - f(x0) and g0 = g - g(y0)."""
    pivots.check_against(model.n, model.k, model.dim)
    f0 = model.embeddings - model.embeddings[pivots.x0_index]
    g0 = model.unembeddings - model.unembeddings[pivots.y0_index]
    return f0, g0


def _raw_projections(model: ModelTable, pivots: PivotConfig) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    f0, g0 = displaced(model, pivots)
    labels = pivots.projection_labels(model.dim)
    L = g0[labels].T if len(labels) == model.dim else np.empty((model.dim, 0))
    N = f0[pivots.x_llv].T
    return L, N, labels


def check_diversity(
    model: ModelTable, pivots: PivotConfig, condition_cap: Optional[float] = None
) -> DiversityCheck:
    """
    Whether M displaced embeddings and M displaced unembeddings are linearly independent.

    Degeneracy is reported, not raised. When Y_LLV holds fewer than M labels
    besides y0, no L exists and L_cond is infinite.
    """
    L, N, _ = _raw_projections(model, pivots)
    L_cond = condition_number(L)
    N_cond = condition_number(N)
    cap = _cap(condition_cap)
    return DiversityCheck(ok=L_cond < cap and N_cond < cap, L_cond=L_cond, N_cond=N_cond)


def build_projections(
    model: ModelTable, pivots: PivotConfig, condition_cap: Optional[float] = None
) -> ProjectionMatrices:
    """
    L with columns g0(y_i) for the projection labels and N with columns f0(x_j) for X_LLV.

    Column order comes from the pivot config, so it is identical for every
    model compared on the same pivots.
    """
    L, N, labels = _raw_projections(model, pivots)
    L_cond = condition_number(L)
    N_cond = condition_number(N)
    cap = _cap(condition_cap)
    if len(labels) < model.dim:
        raise ProjectionError(
            f"Y_LLV has only {len(labels)} labels besides y0; L needs M={model.dim}",
            L_cond=L_cond,
            N_cond=N_cond,
        )
    if L_cond >= cap or N_cond >= cap:
        raise ProjectionError(
            f"singular projection matrices: cond(L)={L_cond:.3g}, cond(N)={N_cond:.3g}, cap={cap:.3g}",
            L_cond=L_cond,
            N_cond=N_cond,
        )
    return ProjectionMatrices(
        L=L,
        N=N,
        L_cond=L_cond,
        N_cond=N_cond,
        label_columns=tuple(labels),
        input_columns=tuple(pivots.x_llv),
    )


def alignment_matrix(reference: ProjectionMatrices, other: ProjectionMatrices) -> np.ndarray:
    """L^{-T} L'^T, which maps f' back to f for linearly equivalent models."""
    return la.solve(reference.L.T, other.L.T)
