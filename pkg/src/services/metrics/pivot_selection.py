"""
Pivot selection for d_LLV.

Every ordered (y0, excluded label) pair is scored by t1, which does not
depend on the input pivots. For the best-scoring pair, candidate input sets
of size M+1 are sampled among inputs of positive weight and the one
minimizing t2 is kept.

A group of models shares one pivot configuration: scores are averaged over
all model pairs and a candidate is feasible only when it is feasible for
every model.
"""
import logging
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from ...core.config import get_settings
from ...core.exceptions import NoFeasiblePivotError, PivotError
from ...models.tables import CondLogProb, PivotConfig
from ...observability.metrics import timed
from .distributional import (
    check_same_grid,
    diversity_matrix,
    llv_input_term,
    llv_label_term,
    uniform_std,
    weighted_std,
    well_conditioned,
)

logger = logging.getLogger(__name__)


class LabelPivotScore(BaseModel):
    """t1 for one (y0, excluded) choice; infinite when a psi_x term vanished."""

    y0_index: int
    excluded_label: int
    t1: float
    feasible: bool


def _label_sets(k: int, excluded: int) -> List[int]:
    return [y for y in range(k) if y != excluded]


def _psi_x(p: CondLogProb, y0: int, labels: List[int]) -> np.ndarray:
    ratios = p.logp[:, labels] - p.logp[:, [y0]]
    return weighted_std(ratios, p.input_weights)


def _check_group(dists: Sequence[CondLogProb]) -> List[Tuple[int, int]]:
    if len(dists) < 2:
        raise PivotError(f"need at least two distributions, got {len(dists)}")
    for other in dists[1:]:
        check_same_grid(dists[0], other)
    return list(combinations(range(len(dists)), 2))


def score_group_label_pivots(dists: Sequence[CondLogProb], psi_tol: Optional[float] = None) -> List[LabelPivotScore]:
    """Score all k(k-1) ordered (y0, excluded) pairs by t1 averaged over every model pair."""
    pairs = _check_group(dists)
    tol = psi_tol if psi_tol is not None else get_settings().psi_tol
    k = dists[0].k
    scores = []
    for y0 in range(k):
        for excluded in range(k):
            if excluded == y0:
                continue
            y_llv = _label_sets(k, excluded)
            others = [y for y in y_llv if y != y0]
            psi = [_psi_x(dist, y0, others) for dist in dists]
            if min(s.min() for s in psi) <= tol:
                scores.append(LabelPivotScore(y0_index=y0, excluded_label=excluded, t1=float("inf"), feasible=False))
                continue
            stub = PivotConfig(x0_index=0, x_llv=[], y0_index=y0, y_llv=y_llv, excluded_label=excluded)
            t1 = np.mean([llv_label_term(dists[a], dists[b], psi[a], psi[b], stub) for a, b in pairs])
            scores.append(LabelPivotScore(y0_index=y0, excluded_label=excluded, t1=float(t1), feasible=True))
    return scores


def score_label_pivots(p: CondLogProb, q: CondLogProb, psi_tol: Optional[float] = None) -> List[LabelPivotScore]:
    """Score all k(k-1) ordered (y0, excluded) pairs by t1."""
    return score_group_label_pivots([p, q], psi_tol)


def select_group_pivots(
    dists: Sequence[CondLogProb],
    dim: int,
    n_input_sets: Optional[int] = None,
    seed: int = 0,
    require_diversity: bool = True,
    condition_cap: Optional[float] = None,
    psi_tol: Optional[float] = None,
) -> PivotConfig:
    """
    Choose one pivot configuration shared by a group of distributions.

    Args:
        dists: Two or more distributions on the same grid
        dim: Representation dimension M
        n_input_sets: Candidate input sets of size M+1 to sample
        seed: Seed for candidate sampling
        require_diversity: Skip candidates whose L or N would be singular for any model
        condition_cap: Condition-number cap for the diversity check
        psi_tol: Threshold below which a psi term counts as vanished

    Returns:
        The feasible PivotConfig with minimal mean t1, then minimal mean t2.
        Ties go to the lowest (y0, excluded, candidate) indices.

    Raises:
        NoFeasiblePivotError: when no candidate satisfies the assumptions
    """
    settings = get_settings()
    n_input_sets = n_input_sets if n_input_sets is not None else settings.n_input_sets
    cap = condition_cap if condition_cap is not None else settings.condition_cap
    tol = psi_tol if psi_tol is not None else settings.psi_tol
    pairs = _check_group(dists)
    n, k = dists[0].n, dists[0].k
    eligible = np.flatnonzero(dists[0].input_weights > 0)
    if len(eligible) < dim + 1:
        raise PivotError(f"need at least M+1={dim + 1} inputs of positive weight, got {len(eligible)} of {n}")
    if k < 3:
        raise PivotError(f"need at least 3 labels, got {k}")
    if require_diversity and k - 2 < dim:
        raise NoFeasiblePivotError(
            f"k={k} labels leave fewer than M={dim} labels for L; use a larger label grid or require_diversity=False"
        )

    with timed("select_pivots"):
        scores = [s for s in score_group_label_pivots(dists, tol) if s.feasible]
        scores.sort(key=lambda s: (s.t1, s.y0_index, s.excluded_label))

        rng = np.random.default_rng(seed)
        candidates = [eligible[rng.choice(len(eligible), dim + 1, replace=False)] for _ in range(n_input_sets)]

        for score in scores:
            y_llv = _label_sets(k, score.excluded_label)
            best: Optional[Tuple[float, PivotConfig]] = None
            for candidate in candidates:
                pivots = PivotConfig(
                    x0_index=int(candidate[0]),
                    x_llv=[int(i) for i in candidate[1:]],
                    y0_index=score.y0_index,
                    y_llv=y_llv,
                    excluded_label=score.excluded_label,
                )
                psi = [_psi_y(dist, pivots) for dist in dists]
                if min(s.min() for s in psi) <= tol:
                    continue
                if require_diversity and not all(
                    well_conditioned(diversity_matrix(dist, pivots, dim), cap) for dist in dists
                ):
                    continue
                t2 = float(np.mean([llv_input_term(dists[a], dists[b], psi[a], psi[b], pivots) for a, b in pairs]))
                if best is None or t2 < best[0]:
                    best = (t2, pivots)
            if best is not None:
                logger.info(
                    f"Selected pivots for {len(dists)} models: y0={score.y0_index}, excluded={score.excluded_label}, "
                    f"x0={best[1].x0_index}, t1={score.t1:.6g}, t2={best[0]:.6g}"
                )
                return best[1]
            logger.debug(f"No feasible input set for y0={score.y0_index}, excluded={score.excluded_label}")

    raise NoFeasiblePivotError(
        f"no feasible pivots among {len(scores)} label pairs and {n_input_sets} input sets; "
        "use a larger grid or sample more input sets"
    )


def select_pivots(
    p: CondLogProb,
    q: CondLogProb,
    dim: int,
    n_input_sets: Optional[int] = None,
    seed: int = 0,
    require_diversity: bool = True,
    condition_cap: Optional[float] = None,
    psi_tol: Optional[float] = None,
) -> PivotConfig:
    """
    Choose shared pivots for comparing p and q.

    Args:
        p, q: Distributions on the same grid
        dim: Representation dimension M
        n_input_sets: Candidate input sets of size M+1 to sample
        seed: Seed for candidate sampling
        require_diversity: Skip candidates whose L or N would be singular
        condition_cap: Condition-number cap for the diversity check
        psi_tol: Threshold below which a psi term counts as vanished

    Returns:
        The feasible PivotConfig with minimal t1, then minimal t2. Pivot
        inputs always carry positive weight.

    Raises:
        NoFeasiblePivotError: when no candidate satisfies the assumptions
    """
    return select_group_pivots(
        [p, q],
        dim,
        n_input_sets=n_input_sets,
        seed=seed,
        require_diversity=require_diversity,
        condition_cap=condition_cap,
        psi_tol=psi_tol,
    )


def _psi_y(p: CondLogProb, pivots: PivotConfig) -> np.ndarray:
    labels = pivots.y_llv
    shifts = p.logp[np.ix_(pivots.x_llv, labels)] - p.logp[pivots.x0_index, labels]
    return uniform_std(shifts, axis=1)
