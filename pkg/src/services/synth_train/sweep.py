"""
Width sweep: train several seeds per hidden width, keep the accurate models and
compare every retained pair on a shared evaluation grid.
"""
import itertools
import logging
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import spearmanr

from ...core.config import get_settings
from ...core.exceptions import LlvkitError, ModelTableError
from ...core.logging import get_event_logger
from ...models.reports import Diagnostic, PermutedPair, WidthSweepResult, WidthSweepRow
from ...models.samples import SampleMatrix
from ...models.tables import ModelPair, ModelTable, PivotConfig
from ...observability.metrics import timed
from ..bound_lab import verify_bound
from ..metrics import d_llv, m_cca, select_group_pivots, select_pivots
from ..model_core import cond_log_probs
from .dataset import AngularDataset, gen_angular_data
from .trainer import NormConstraint, TrainConfig, TrainedModel, train

logger = logging.getLogger(__name__)
events = get_event_logger(__name__)

RETENTION_ACCURACY = 0.9
MIN_RETAINED = 5
EVAL_GRID_SIZE = 2000


class SweepProfile(BaseModel):
    widths: List[int]
    n_seeds: int = Field(..., ge=1)
    steps: int = Field(..., gt=0)


PROFILES: Dict[str, SweepProfile] = {
    "ci": SweepProfile(widths=[16, 64], n_seeds=5, steps=3000),
    "full": SweepProfile(widths=[16, 32, 64, 128, 256], n_seeds=20, steps=15000),
}


def _train_job(job: Tuple[TrainConfig, AngularDataset]) -> TrainedModel:
    config, data = job
    return train(config, data)


def train_seeds(configs: Sequence[TrainConfig], data: AngularDataset, num_workers: Optional[int] = None) -> List[TrainedModel]:
    """Train one model per config, in a process pool when more than one worker is available."""
    workers = num_workers or get_settings().num_threads
    jobs = [(config, data) for config in configs]
    if workers <= 1 or len(jobs) <= 1:
        return [_train_job(job) for job in jobs]
    with Pool(min(workers, len(jobs))) as pool:
        return pool.map(_train_job, jobs)


def evaluation_grid(c: int, n: int = EVAL_GRID_SIZE, sigma: float = 3.0, seed: int = 1) -> np.ndarray:
    """Fresh draw from the data distribution, shared by every model of a sweep."""
    return gen_angular_data(c, n, sigma, seed).points


def unembedding_order(model: TrainedModel) -> Tuple[int, ...]:
    """
    Cyclic order of the unembedding directions around the origin, canonicalized
    to start at label 0 and read in whichever direction gives the smaller tuple.
    """
    unembedding = model.params.unembedding
    if unembedding.shape[1] != 2:
        raise ModelTableError("unembedding order is defined for two-dimensional representations")
    order = [int(label) for label in np.argsort(np.arctan2(unembedding[:, 1], unembedding[:, 0]))]
    start = order.index(0)
    forward = tuple(order[start:] + order[:start])
    backward = (forward[0],) + tuple(reversed(forward[1:]))
    return min(forward, backward)


def find_permuted_pairs(
    models: Sequence[TrainedModel],
    grid: np.ndarray,
    lam: Optional[float] = None,
    n_input_sets: Optional[int] = None,
    seed: int = 0,
) -> List[PermutedPair]:
    """Pairs of models whose unembedding orders differ, with m_cca and d_LLV between them."""
    found = []
    for a, b in itertools.combinations(models, 2):
        order_a, order_b = unembedding_order(a), unembedding_order(b)
        if order_a == order_b:
            continue
        table_a, table_b = a.to_model_table(grid), b.to_model_table(grid)
        weights = table_a.weights()
        cca = m_cca(SampleMatrix(table_a.embeddings, weights), SampleMatrix(table_b.embeddings, weights))
        distance = None
        try:
            p, q = cond_log_probs(table_a, weights), cond_log_probs(table_b, weights)
            pivots = select_pivots(p, q, dim=table_a.dim, n_input_sets=n_input_sets, seed=seed)
            distance = d_llv(p, q, pivots, lam).value
        except LlvkitError as exc:
            logger.warning(f"No d_LLV for seeds {a.config.seed} and {b.config.seed}: {exc}")
        found.append(
            PermutedPair(
                width=a.config.width,
                seed_a=a.config.seed,
                seed_b=b.config.seed,
                order_a=list(order_a),
                order_b=list(order_b),
                accuracy_a=a.accuracy,
                accuracy_b=b.accuracy,
                m_cca=cca,
                d_llv=distance,
            )
        )
    return found


def _mean_std(values: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    mean = float(np.mean(values))
    return mean, (float(np.std(values)) if len(values) >= 2 else None)


def summarize_width(
    c: int, width: int, n_retained: int, d_llv_values: Sequence[float], d_svd_values: Sequence[float]
) -> WidthSweepRow:
    """Mean and population std of the pairwise values; std is None below two values."""
    mean_llv, std_llv = _mean_std(d_llv_values)
    mean_svd, std_svd = _mean_std(d_svd_values)
    return WidthSweepRow(
        c=c,
        width=width,
        n_retained=n_retained,
        mean_d_llv=mean_llv,
        std_d_llv=std_llv,
        mean_max_d_svd=mean_svd,
        std_max_d_svd=std_svd,
    )


def compare_group(
    tables: Sequence[ModelTable],
    lam: Optional[float] = None,
    n_input_sets: Optional[int] = None,
    seed: int = 0,
) -> Tuple[List[float], List[float], List[Diagnostic], Optional[PivotConfig]]:
    """
    Pairwise d_LLV and max d_SVD over a group of models evaluated on one grid.

    One pivot configuration is selected over the whole group and shared by
    every pair.
    Pairs whose certificate cannot be formed are skipped with a diagnostic.
    """
    diagnostics: List[Diagnostic] = []
    weights = tables[0].weights()
    probs = [cond_log_probs(table, weights) for table in tables]
    try:
        pivots = select_group_pivots(probs, dim=tables[0].dim, n_input_sets=n_input_sets, seed=seed)
    except LlvkitError as exc:
        diagnostics.append(Diagnostic(level="warning", category="pivots", message=str(exc)))
        return [], [], diagnostics, None

    llv_values, svd_values = [], []
    for i, j in itertools.combinations(range(len(tables)), 2):
        try:
            certificate = verify_bound(ModelPair(tables[i], tables[j]), pivots, lam)
        except LlvkitError as exc:
            diagnostics.append(Diagnostic(level="warning", category="pair", message=str(exc), field=f"{i},{j}"))
            continue
        if certificate.llv is None or certificate.lhs is None:
            diagnostics.append(
                Diagnostic(
                    level="warning",
                    category="pair",
                    message="certificate preconditions not met",
                    field=f"{i},{j}",
                )
            )
            continue
        llv_values.append(certificate.llv.value)
        svd_values.append(certificate.lhs)
    return llv_values, svd_values, diagnostics, pivots


def width_trend_spearman(rows: Sequence[WidthSweepRow]) -> Optional[float]:
    """Spearman rank correlation of width against mean d_LLV over rows with a mean."""
    points = [(row.width, row.mean_d_llv) for row in rows if row.mean_d_llv is not None]
    if len(points) < 2:
        return None
    rho, _ = spearmanr([w for w, _ in points], [m for _, m in points])
    return None if np.isnan(rho) else float(rho)


def width_sweep(
    c: int,
    widths: Sequence[int],
    seeds: Sequence[int],
    lam: Optional[float] = None,
    steps: int = 3000,
    data_seed: int = 0,
    n_data: int = 20000,
    n_eval: int = EVAL_GRID_SIZE,
    min_retained: int = MIN_RETAINED,
    retention: float = RETENTION_ACCURACY,
    norm_constraint: NormConstraint = NormConstraint.NONE,
    num_workers: Optional[int] = None,
    n_input_sets: Optional[int] = None,
    **train_overrides,
) -> WidthSweepResult:
    """
    Train every (width, seed), keep models with accuracy above the retention
    threshold and summarize pairwise d_LLV and max d_SVD per width.

    Widths with fewer than min_retained models produce a row with empty
    statistics and a warning diagnostic.
    """
    settings = get_settings()
    resolved = {
        "c": c,
        "widths": list(widths),
        "seeds": list(seeds),
        "lambda": lam if lam is not None else settings.default_lambda,
        "steps": steps,
        "data_seed": data_seed,
        "n_data": n_data,
        "n_eval": n_eval,
        "min_retained": min_retained,
        "retention": retention,
        "norm_constraint": NormConstraint(norm_constraint).value,
        "n_input_sets": n_input_sets if n_input_sets is not None else settings.n_input_sets,
        **train_overrides,
    }
    data = gen_angular_data(c, n_data, seed=data_seed)
    grid = evaluation_grid(c, n_eval, data.sigma, data_seed + 1)
    rows: List[WidthSweepRow] = []
    diagnostics: List[Diagnostic] = []
    permuted: List[PermutedPair] = []

    for width in widths:
        configs = [
            TrainConfig(width=width, steps=steps, seed=seed, norm_constraint=norm_constraint, **train_overrides)
            for seed in seeds
        ]
        with timed("width_sweep_width", {"width": str(width)}):
            models = train_seeds(configs, data, num_workers)
        retained = [model for model in models if model.retained(retention)]
        if len(retained) < min_retained:
            message = f"width {width}: {len(retained)} of {len(models)} models above accuracy {retention}"
            logger.warning(message)
            diagnostics.append(
                Diagnostic(
                    level="warning",
                    category="retention",
                    message=message,
                    field=f"width={width}",
                    suggestion="train more seeds or more steps",
                )
            )
            rows.append(summarize_width(c, width, len(retained), [], []))
            continue

        tables = [model.to_model_table(grid) for model in retained]
        llv_values, svd_values, pair_diagnostics, _ = compare_group(tables, lam, n_input_sets, data_seed)
        diagnostics.extend(pair_diagnostics)
        row = summarize_width(c, width, len(retained), llv_values, svd_values)
        rows.append(row)
        if retained[0].params.dim == 2:
            permuted.extend(find_permuted_pairs(retained, grid, lam, n_input_sets, data_seed))
        events.info("width_sweep_row", **row.model_dump())

    return WidthSweepResult(
        config=resolved,
        c=c,
        rows=rows,
        spearman=width_trend_spearman(rows),
        permuted_pairs=permuted,
        diagnostics=diagnostics,
    )
