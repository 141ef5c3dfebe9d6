"""
Circle construction in two dimensions.

Unembeddings sit at angles 2 pi j / k with norm rho. Each label owns a
cluster of embeddings that are angularly closest to its unembedding. The
second model moves cluster j, together with unembedding j, to angle
2 pi pi(j) / k, so both models put the same top label on every input.

Every cluster reuses one local pattern of angular offsets and radii. With
equal cluster sizes this makes the embedding cross-covariance of the two
models a sum over cluster centers only, which a decorrelating permutation
cancels exactly.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from ...core.exceptions import InfeasibleConstructionError
from ...models.tables import ModelTable
from .permutations import PermutationSpec

logger = logging.getLogger(__name__)


def circle_angles(k: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(k) / k


def circle_unembeddings(k: int, rho: float) -> np.ndarray:
    angles = circle_angles(k)
    return rho * np.column_stack([np.cos(angles), np.sin(angles)])


def default_half_width(k: int) -> float:
    """pi/k minus a margin of pi/(6k)."""
    return np.pi / k - np.pi / (6 * k)


def local_pattern(
    points_per_label: int, half_width: float, radius: float, radius_log_sd: float, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Angular offsets, uniform in [-half_width, half_width], and log-normal radii around `radius`."""
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-half_width, half_width, points_per_label)
    radii = radius * np.exp(rng.normal(0.0, radius_log_sd, points_per_label))
    return offsets, radii


def build_circle_pair(
    k: int = 5,
    rho: float = 3.0,
    points_per_label: int = 40,
    permutation: Optional[PermutationSpec] = None,
    seed: int = 0,
    angular_half_width: Optional[float] = None,
    radius: float = 1.0,
    radius_log_sd: float = 0.05,
) -> Tuple[ModelTable, ModelTable]:
    """
    Build a pair of circle models.

    Args:
        k: Number of labels, at least 3
        rho: Norm of every unembedding
        points_per_label: Cluster size
        permutation: Cluster/unembedding permutation of the second model;
            swaps two opposite clusters when omitted
        seed: Seed for the shared local pattern
        angular_half_width: Cluster half-width in radians, below pi/k;
            pi/k - pi/(6k) when omitted
        radius: Median embedding norm
        radius_log_sd: Log-normal spread of the embedding norms

    Returns:
        (first, second) model tables on the same grid
    """
    if k < 3:
        raise InfeasibleConstructionError(f"circle construction needs k >= 3, got {k}")
    if rho <= 0:
        raise InfeasibleConstructionError(f"rho must be positive, got {rho}")
    if radius <= 0 or radius_log_sd < 0:
        raise InfeasibleConstructionError(f"need radius > 0 and radius_log_sd >= 0, got {radius}, {radius_log_sd}")
    permutation = permutation or PermutationSpec.circle_swap(k)
    if permutation.k != k:
        raise InfeasibleConstructionError(f"permutation acts on {permutation.k} labels, expected {k}")
    half_width = default_half_width(k) if angular_half_width is None else angular_half_width
    if not 0 <= half_width < np.pi / k:
        raise InfeasibleConstructionError(f"angular half-width must lie in [0, pi/k), got {half_width}")

    offsets, radii = local_pattern(points_per_label, half_width, radius, radius_log_sd, seed)
    angles = circle_angles(k)
    pi = np.array(permutation.pi)

    # Clusters share offsets and radii; only their centers move.
    cluster = np.repeat(np.arange(k), points_per_label)
    offset = np.tile(offsets, k)
    norms = np.tile(radii, k)
    first_angle = angles[cluster] + offset
    second_angle = angles[pi[cluster]] + offset

    embeddings = norms[:, None] * np.column_stack([np.cos(first_angle), np.sin(first_angle)])
    embeddings_b = norms[:, None] * np.column_stack([np.cos(second_angle), np.sin(second_angle)])
    unembeddings = circle_unembeddings(k, rho)
    unembeddings_b = unembeddings[pi]

    input_ids = tuple(f"c{c}_{i}" for c in range(k) for i in range(points_per_label))
    label_ids = tuple(f"y{j}" for j in range(k))
    logger.debug(f"Built circle pair k={k}, rho={rho}, permutation={permutation.pi}")
    return (
        ModelTable(embeddings, unembeddings, input_ids, label_ids),
        ModelTable(embeddings_b, unembeddings_b, input_ids, label_ids),
    )


def cluster_labels(k: int, points_per_label: int) -> np.ndarray:
    """Assigned label of every input of a circle model."""
    return np.repeat(np.arange(k), points_per_label)


def nearest_unembedding(model: ModelTable) -> np.ndarray:
    """Index of the angularly closest unembedding for every input."""
    emb = model.embeddings / np.linalg.norm(model.embeddings, axis=1, keepdims=True)
    unemb = model.unembeddings / np.linalg.norm(model.unembeddings, axis=1, keepdims=True)
    return np.argmax(emb @ unemb.T, axis=1)
