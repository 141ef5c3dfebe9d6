"""
Sweeps over constructed families: the rho table and the noise-perturbation bound table.
"""
import logging
from typing import List, Optional, Sequence

from ...core.logging import get_event_logger
from ...models.reports import BoundSweepRecord, RhoSweepRecord
from ...models.samples import SampleMatrix
from ...models.tables import ModelPair, ModelTable
from ...observability.metrics import timed
from ..bound_lab import verify_bound
from ..metrics import d_kl, d_llv, m_cca, select_pivots
from ..model_core import cond_log_probs
from .circle import build_circle_pair
from .families import RhoFamily, perturb_embeddings
from .permutations import PermutationSpec

logger = logging.getLogger(__name__)
events = get_event_logger(__name__)

DEFAULT_SIGMAS = [0.02 * i for i in range(10)]


def rho_sweep(
    family: RhoFamily,
    lam: Optional[float] = None,
    n_input_sets: Optional[int] = None,
    seed: int = 0,
) -> List[RhoSweepRecord]:
    """
    One record per rho: d_KL both ways, d_LLV, m_CCA of the embeddings and max d_SVD.

    Pivots are selected once on the smallest-rho pair and reused for every rho.
    """
    rhos = sorted(family.rho_values)
    first, second = family.build_pair(rhos[0])
    weights = first.weights()
    diverse = family.k - 2 >= family.dim
    pivots = select_pivots(
        cond_log_probs(first, weights),
        cond_log_probs(second, weights),
        dim=family.dim,
        n_input_sets=n_input_sets,
        seed=seed,
        require_diversity=diverse,
    )

    records = []
    for rho in family.rho_values:
        with timed("rho_sweep_point"):
            first, second = family.build_pair(rho)
            p = cond_log_probs(first, weights)
            q = cond_log_probs(second, weights)
            llv = d_llv(p, q, pivots, lam)
            cca = m_cca(SampleMatrix(first.embeddings, weights), SampleMatrix(second.embeddings, weights))
            max_d_svd = None
            if diverse:
                certificate = verify_bound(ModelPair(first, second), pivots, lam)
                max_d_svd = certificate.lhs
            record = RhoSweepRecord(
                rho=rho,
                d_kl_pq=d_kl(p, q),
                d_kl_qp=d_kl(q, p),
                d_llv=llv.value,
                m_cca=cca,
                max_d_svd=max_d_svd,
            )
        events.info("rho_sweep_point", **record.model_dump())
        records.append(record)
    return records


def default_reference_model(seed: int = 0, k: int = 6, rho: float = 4.0, points_per_label: int = 30) -> ModelTable:
    """First model of an identity circle pair, used as the unperturbed reference."""
    reference, _ = build_circle_pair(
        k=k, rho=rho, points_per_label=points_per_label, permutation=PermutationSpec.identity(k), seed=seed
    )
    return reference


def perturbation_sweep(
    reference: ModelTable,
    sigmas: Sequence[float],
    seed: int = 0,
    lam: Optional[float] = None,
    n_input_sets: Optional[int] = None,
    n_column_resamples: int = 0,
) -> List[BoundSweepRecord]:
    """
    Bound certificates for the reference against noisy copies of itself.

    Every noise level reuses the same standard-normal draw, scaled by sigma,
    and the pivots selected on the noisiest pair. Rows come back sorted by sigma.
    """
    sigmas = sorted(float(s) for s in sigmas)
    weights = reference.weights()
    p = cond_log_probs(reference, weights)
    noisiest = perturb_embeddings(reference, sigmas[-1], seed)
    pivots = select_pivots(p, cond_log_probs(noisiest, weights), dim=reference.dim, n_input_sets=n_input_sets, seed=seed)

    records = []
    for sigma in sigmas:
        perturbed = perturb_embeddings(reference, sigma, seed)
        certificate = verify_bound(ModelPair(reference, perturbed), pivots, lam, n_column_resamples, seed)
        record = BoundSweepRecord(
            param=sigma,
            epsilon=certificate.epsilon,
            lhs_emb=certificate.lhs_emb,
            lhs_unemb=certificate.lhs_unemb,
            rhs=certificate.rhs,
            holds=certificate.holds,
            vacuous=certificate.vacuous,
        )
        events.info("bound_sweep_point", **record.model_dump())
        records.append(record)
    return records
