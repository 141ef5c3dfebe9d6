"""
Error terms relating two models with nearby distributions.

For embeddings, psi-normalized log-ratio differences eps_{y_i}(x) give
f = A~ f' + L^{-T} S^{-1} eps_y with A~ = L^{-T} S^{-1} S' L'^T. For
unembeddings, eps_{x_j}(y) gives g = B g' + h_g with B = N^{-T} D^{-1} D' N'^T,
where h_g also absorbs the log-partition offsets c_j = log Z(x_j) - log Z(x0).
"""
import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg as la

from ...core.exceptions import AssumptionViolationError
from ...models.reports import VarCorrComponent
from ...models.samples import PsiTerms
from ...models.tables import CondLogProb, ModelPair, PivotConfig, ProjectionMatrices
from ..metrics.distributional import psi_terms
from ..model_core import build_projections, cond_log_probs, log_partition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairContext:
    """Distributions, psi terms and projections of a pair on fixed pivots."""

    pair: ModelPair
    pivots: PivotConfig
    p: CondLogProb
    q: CondLogProb
    psi_p: PsiTerms
    psi_q: PsiTerms
    proj_p: ProjectionMatrices
    proj_q: ProjectionMatrices


@dataclass(frozen=True)
class Alignment:
    """Linear part and residual offsets of the reconstruction of one model from the other."""

    matrix: np.ndarray
    offsets: np.ndarray


def pair_context(pair: ModelPair, pivots: PivotConfig) -> PairContext:
    """Check diversity and positivity of psi, then collect what the error terms need."""
    weights = pair.weights()
    p = cond_log_probs(pair.first, weights)
    q = cond_log_probs(pair.second, weights)
    psi_p = psi_terms(p, pivots)
    psi_q = psi_terms(q, pivots)
    violations = [*psi_p.violations, *psi_q.violations]
    if violations:
        raise AssumptionViolationError(f"psi terms vanished: {', '.join(v.field for v in violations)}", violations)
    proj_p = build_projections(pair.first, pivots)
    proj_q = build_projections(pair.second, pivots)
    return PairContext(pair, pivots, p, q, psi_p, psi_q, proj_p, proj_q)


def _embedding_eps(ctx: PairContext) -> np.ndarray:
    dim = ctx.pair.dim
    labels = list(ctx.proj_p.label_columns)
    y0 = ctx.pivots.y0_index
    ratio_p = ctx.p.logp[:, labels] - ctx.p.logp[:, [y0]]
    ratio_q = ctx.q.logp[:, labels] - ctx.q.logp[:, [y0]]
    return ratio_p / ctx.psi_p.psi_x[:dim] - ratio_q / ctx.psi_q.psi_x[:dim]


def _unembedding_eps(ctx: PairContext) -> np.ndarray:
    rows, x0 = ctx.pivots.x_llv, ctx.pivots.x0_index
    shift_p = ctx.p.logp[rows, :] - ctx.p.logp[x0, :]
    shift_q = ctx.q.logp[rows, :] - ctx.q.logp[x0, :]
    return (shift_p / ctx.psi_p.psi_y[:, None] - shift_q / ctx.psi_q.psi_y[:, None]).T


def epsilon_y_matrix(pair: ModelPair, pivots: PivotConfig) -> np.ndarray:
    """eps_{y_i}(x) for every input (rows) and every column label of L (columns)."""
    return _embedding_eps(pair_context(pair, pivots))


def epsilon_y_vector(pair: ModelPair, pivots: PivotConfig, x_index: int) -> np.ndarray:
    return epsilon_y_matrix(pair, pivots)[x_index]


def epsilon_x_matrix(pair: ModelPair, pivots: PivotConfig) -> np.ndarray:
    """eps_{x_j}(y) for every label (rows) and every input of X_LLV (columns)."""
    return _unembedding_eps(pair_context(pair, pivots))


def epsilon_x_vector(pair: ModelPair, pivots: PivotConfig, y_index: int) -> np.ndarray:
    return epsilon_x_matrix(pair, pivots)[y_index]


def embedding_alignment(pair: ModelPair, pivots: PivotConfig) -> Alignment:
    """A~ and h_f(x) = L^{-T} S^{-1} eps_y(x), so that f = A~ f' + h_f row by row."""
    ctx = pair_context(pair, pivots)
    dim = pair.dim
    s_inv = np.diag(ctx.psi_p.psi_x[:dim])
    s_prime = ctx.psi_q.S(dim)
    lift = la.solve(ctx.proj_p.L.T, s_inv)
    matrix = lift @ s_prime @ ctx.proj_q.L.T
    offsets = _embedding_eps(ctx) @ lift.T
    return Alignment(matrix=matrix, offsets=offsets)


def unembedding_alignment(pair: ModelPair, pivots: PivotConfig) -> Alignment:
    """B and h_g(y) = N^{-T}(D^{-1} eps_x(y) + c - D^{-1} D' c'), so that g = B g' + h_g."""
    ctx = pair_context(pair, pivots)
    rows, x0 = ctx.pivots.x_llv, ctx.pivots.x0_index
    d_inv = np.diag(ctx.psi_p.psi_y)
    d_prime = ctx.psi_q.D()
    log_z_p = log_partition(pair.first)
    log_z_q = log_partition(pair.second)
    c_p = log_z_p[rows] - log_z_p[x0]
    c_q = log_z_q[rows] - log_z_q[x0]
    lift = la.solve(ctx.proj_p.N.T, np.eye(pair.dim))
    matrix = lift @ d_inv @ d_prime @ ctx.proj_q.N.T
    inner = _unembedding_eps(ctx) @ d_inv.T + (c_p - d_inv @ d_prime @ c_q)
    return Alignment(matrix=matrix, offsets=inner @ lift.T)


def _weighted_corr(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
    a = a - weights @ a
    b = b - weights @ b
    return float((weights @ (a * b)) / np.sqrt((weights @ a**2) * (weights @ b**2)))


def _weighted_var(values: np.ndarray, weights: np.ndarray) -> float:
    return float(weights @ (values - weights @ values) ** 2)


def var_corr_identity(pair: ModelPair, pivots: PivotConfig) -> List[VarCorrComponent]:
    """
    Var[eps] against 2(1 - Corr) for every column of L and of N.

    Embedding components vary over inputs under p_D; unembedding components
    vary uniformly over Y_LLV.
    """
    ctx = pair_context(pair, pivots)
    components: List[VarCorrComponent] = []

    weights = ctx.p.input_weights
    eps_y = _embedding_eps(ctx)
    z_p = pair.first.embeddings @ ctx.proj_p.L
    z_q = pair.second.embeddings @ ctx.proj_q.L
    for column, label in enumerate(ctx.proj_p.label_columns):
        var_eps = _weighted_var(eps_y[:, column], weights)
        other = 2.0 * (1.0 - _weighted_corr(z_p[:, column], z_q[:, column], weights))
        components.append(
            VarCorrComponent(side="embedding", index=label, var_eps=var_eps, two_one_minus_corr=other, gap=abs(var_eps - other))
        )

    labels = ctx.pivots.y_llv
    uniform = np.full(len(labels), 1.0 / len(labels))
    eps_x = _unembedding_eps(ctx)[labels]
    w_p = pair.first.unembeddings[labels] @ ctx.proj_p.N
    w_q = pair.second.unembeddings[labels] @ ctx.proj_q.N
    for column, index in enumerate(ctx.proj_p.input_columns):
        var_eps = _weighted_var(eps_x[:, column], uniform)
        other = 2.0 * (1.0 - _weighted_corr(w_p[:, column], w_q[:, column], uniform))
        components.append(
            VarCorrComponent(side="unembedding", index=index, var_eps=var_eps, two_one_minus_corr=other, gap=abs(var_eps - other))
        )
    return components
