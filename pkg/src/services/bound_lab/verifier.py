"""
Verifier for the bound max{d_svd(L^T f, L'^T f'), d_svd(N^T g, N'^T g')} <= 2 M d_LLV.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as la

from ...core.config import get_settings
from ...core.exceptions import DegenerateVarianceError, ProjectionError
from ...models.reports import BoundCertificate, Diagnostic
from ...models.samples import SampleMatrix
from ...models.tables import ModelPair, PivotConfig, ProjectionMatrices
from ...observability.metrics import timed
from ..metrics.distributional import d_llv, psi_terms
from ..metrics.representational import cross_covariance, d_svd, interior_lemma_check, standardize
from ..model_core import build_projections, cond_log_probs, condition_number, displaced

logger = logging.getLogger(__name__)


def projected_samples(pair: ModelPair, pivots: PivotConfig, proj_p: ProjectionMatrices, proj_q: ProjectionMatrices) -> Tuple[SampleMatrix, SampleMatrix, SampleMatrix, SampleMatrix]:
    """z1 = L^T f, z2 = L'^T f' over inputs; w1 = N^T g, w2 = N'^T g' over Y_LLV."""
    weights = pair.weights()
    z1 = SampleMatrix(pair.first.embeddings @ proj_p.L, weights)
    z2 = SampleMatrix(pair.second.embeddings @ proj_q.L, weights)
    labels = pivots.y_llv
    uniform = np.full(len(labels), 1.0 / len(labels))
    w1 = SampleMatrix(pair.first.unembeddings[labels] @ proj_p.N, uniform)
    w2 = SampleMatrix(pair.second.unembeddings[labels] @ proj_q.N, uniform)
    return z1, z2, w1, w2


def _covariance_diagnostics(name: str, a: SampleMatrix, b: SampleMatrix, cap: float, tol: float) -> List[Diagnostic]:
    issues = []
    za, zb = standardize(a), standardize(b)
    within = condition_number(cross_covariance(za, za))
    if within >= cap:
        issues.append(
            Diagnostic(level="warning", category="covariance", message=f"{name} within-set covariance is singular", field=f"Sigma_{name}{name}")
        )
    smallest = float(la.svdvals(cross_covariance(za, zb)).min())
    if smallest <= tol:
        issues.append(
            Diagnostic(
                level="warning",
                category="covariance",
                message=f"{name} cross-covariance is singular (smallest singular value {smallest:.3g})",
                field=f"Sigma_{name}1{name}2",
            )
        )
    return issues


def _resampled_lhs(pair: ModelPair, pivots: PivotConfig, n_resamples: int, seed: int, cap: float) -> Tuple[List[float], int]:
    """d_svd(L_r^T f, L_r'^T f') for random ordered M-subsets of Y_LLV without y0."""
    rng = np.random.default_rng(seed)
    _, g0_p = displaced(pair.first, pivots)
    _, g0_q = displaced(pair.second, pivots)
    pool = np.array(pivots.psi_labels)
    weights = pair.weights()
    values, skipped = [], 0
    for _ in range(n_resamples):
        labels = rng.choice(pool, pair.dim, replace=False)
        L_p, L_q = g0_p[labels].T, g0_q[labels].T
        if condition_number(L_p) >= cap or condition_number(L_q) >= cap:
            skipped += 1
            continue
        z1 = SampleMatrix(pair.first.embeddings @ L_p, weights)
        z2 = SampleMatrix(pair.second.embeddings @ L_q, weights)
        values.append(d_svd(z1, z2))
    return values, skipped


def verify_bound(
    pair: ModelPair,
    pivots: PivotConfig,
    lam: Optional[float] = None,
    n_column_resamples: int = 0,
    seed: int = 0,
    slack: float = 1e-9,
) -> BoundCertificate:
    """
    Evaluate both sides of the bound on shared pivots.

    Failures of invertibility (L, L', N, N') or positivity of psi leave
    `holds` undefined. Singular covariance or cross-covariance matrices are
    recorded as warnings while the inequality is still evaluated.

    Args:
        pair: Models on the same grid
        pivots: Shared pivot configuration
        lam: Weighting constant of d_LLV
        n_column_resamples: Extra random label subsets for the embedding side
        seed: Seed for the column resamples
        slack: Absolute tolerance on the inequality

    Returns:
        BoundCertificate with diagnostics
    """
    settings = get_settings()
    cap, tol = settings.condition_cap, settings.singular_tol
    dim = pair.dim
    diagnostics: List[Diagnostic] = []
    certificate = BoundCertificate(pivots=pivots, dim=dim, n_column_resamples=n_column_resamples)

    with timed("verify_bound"):
        try:
            proj_p = build_projections(pair.first, pivots)
            proj_q = build_projections(pair.second, pivots)
        except ProjectionError as e:
            diagnostics.append(
                Diagnostic(level="error", category="diversity", message=str(e), field="L,N", suggestion="select other pivots")
            )
            return certificate.model_copy(update={"diagnostics": diagnostics})

        weights = pair.weights()
        p = cond_log_probs(pair.first, weights)
        q = cond_log_probs(pair.second, weights)
        violations = [*psi_terms(p, pivots).violations, *psi_terms(q, pivots).violations]
        if violations:
            return certificate.model_copy(update={"diagnostics": violations})

        llv = d_llv(p, q, pivots, lam)
        epsilon = llv.value
        rhs = 2.0 * dim * epsilon
        z1, z2, w1, w2 = projected_samples(pair, pivots, proj_p, proj_q)
        try:
            diagnostics.extend(_covariance_diagnostics("z", z1, z2, cap, tol))
            diagnostics.extend(_covariance_diagnostics("w", w1, w2, cap, tol))
            lhs_emb = d_svd(z1, z2)
            lhs_unemb = d_svd(w1, w2)
            interior_emb = interior_lemma_check(z1, z2)
            interior_unemb = interior_lemma_check(w1, w2)
        except DegenerateVarianceError as e:
            diagnostics.append(Diagnostic(level="error", category="covariance", message=str(e), field=f"component {e.component}"))
            return certificate.model_copy(update={"epsilon": epsilon, "rhs": rhs, "llv": llv, "diagnostics": diagnostics})

        lhs = max(lhs_emb, lhs_unemb)
        holds = lhs <= rhs + slack
        update = {
            "epsilon": epsilon,
            "lhs_emb": lhs_emb,
            "lhs_unemb": lhs_unemb,
            "rhs": rhs,
            "holds": holds,
            "vacuous": rhs >= 1.0,
            "preconditions_met": not diagnostics,
            "llv": llv,
            "interior_emb": interior_emb,
            "interior_unemb": interior_unemb,
        }
        if n_column_resamples > 0:
            values, skipped = _resampled_lhs(pair, pivots, n_column_resamples, seed, cap)
            if skipped:
                diagnostics.append(
                    Diagnostic(level="info", category="diversity", message=f"{skipped} column resamples had singular L and were skipped")
                )
            if values:
                update["resampled_lhs_emb_max"] = max(values)
                update["resampled_holds"] = max(values) <= rhs + slack
        update["diagnostics"] = diagnostics

    if not holds:
        logger.warning(f"Bound violated: lhs={lhs:.6g} > rhs={rhs:.6g}")
    return certificate.model_copy(update=update)
