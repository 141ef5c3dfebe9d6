"""
Permuted-unembedding construction where the KL divergence vanishes as rho grows
while the embeddings of the two models are not linearly related.

The first model has g(y_i) = rho e_i for i <= M, g(y_{M+1}) = -rho e_1 and,
when k = M+2, g(y_{M+2}) = -rho e_2. For k = M+2 the second model swaps the
last two unembeddings, turns the -e_1 cluster a quarter turn counterclockwise
and the -e_2 cluster a quarter turn clockwise in the first two axes. For
k = M+1 the last unembedding moves to -rho e_2 and its cluster turns
counterclockwise. Two truncated sequences of inputs approach the angle
3 pi / 4 from both sides; on one side the second model rotates them, on the
other it leaves them in place.
"""
import logging
from typing import List, Tuple

import numpy as np

from ...core.exceptions import InfeasibleConstructionError
from ...models.tables import ModelTable
from .permutations import PermutationKind, PermutationSpec

logger = logging.getLogger(__name__)

CLUSTER_ANGLE = np.deg2rad(15.0)
RADIUS_RANGE = (0.8, 1.2)


def _rotate_ccw(points: np.ndarray) -> np.ndarray:
    out = points.copy()
    out[:, 0], out[:, 1] = -points[:, 1], points[:, 0]
    return out


def _rotate_cw(points: np.ndarray) -> np.ndarray:
    out = points.copy()
    out[:, 0], out[:, 1] = points[:, 1], -points[:, 0]
    return out


def theorem_directions(dim: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit unembedding directions of the first and second model."""
    permutation = PermutationSpec.theorem(dim, k)
    eye = np.eye(dim)
    first = np.array([eye[i] for i in range(dim)] + [-eye[0], -eye[1]][: k - dim])
    second = first[permutation.pi]
    if permutation.kind == PermutationKind.THEOREM_KM1:
        second[-1] = -eye[1]
    return first, second


def _cluster(direction: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points within CLUSTER_ANGLE of a unit direction with radii in RADIUS_RANGE."""
    points = []
    for _ in range(count):
        tangent = rng.normal(size=direction.shape)
        tangent -= (tangent @ direction) * direction
        tangent /= np.linalg.norm(tangent)
        angle = rng.uniform(0.0, CLUSTER_ANGLE)
        radius = rng.uniform(*RADIUS_RANGE)
        points.append(radius * (np.cos(angle) * direction + np.sin(angle) * tangent))
    return np.array(points)


def _planar(angles: np.ndarray, dim: int) -> np.ndarray:
    points = np.zeros((len(angles), dim))
    points[:, 0] = np.cos(angles)
    points[:, 1] = np.sin(angles)
    return points


def build_theorem_pair(
    dim: int = 2,
    k: int = 4,
    rho: float = 3.0,
    truncation: int = 50,
    points_per_label: int = 20,
    seed: int = 0,
    sequence_mass: float = 0.0,
) -> Tuple[ModelTable, ModelTable]:
    """
    Build the permuted-unembedding pair.

    Args:
        dim: Representation dimension M >= 2
        k: Number of labels, M+1 or M+2
        rho: Norm of every unembedding
        truncation: Number of points kept from each of the two input sequences
        points_per_label: Cluster size per label
        seed: Seed for the cluster points
        sequence_mass: Total input weight placed on the sequence points

    Returns:
        (first, second) model tables on the same grid
    """
    if dim < 2:
        raise InfeasibleConstructionError(f"theorem construction needs M >= 2, got {dim}")
    if k > dim + 2:
        raise InfeasibleConstructionError(
            f"k={k} > M+2: the remaining unembeddings cannot all keep more than a right angle "
            "from e_2, -e_1 and -e_2"
        )
    if k < dim + 1:
        raise InfeasibleConstructionError(f"need k >= M+1, got M={dim}, k={k}")
    if rho <= 0 or truncation < 1 or points_per_label < 1:
        raise InfeasibleConstructionError("rho, truncation and points_per_label must be positive")
    if not 0.0 <= sequence_mass < 1.0:
        raise InfeasibleConstructionError(f"sequence_mass must lie in [0, 1), got {sequence_mass}")

    rng = np.random.default_rng(seed)
    first_dirs, second_dirs = theorem_directions(dim, k)

    clusters_a: List[np.ndarray] = []
    clusters_b: List[np.ndarray] = []
    for label in range(k):
        points = _cluster(first_dirs[label], points_per_label, rng)
        clusters_a.append(points)
        if label == dim:
            clusters_b.append(_rotate_ccw(points))
        elif label == dim + 1:
            clusters_b.append(_rotate_cw(points))
        else:
            clusters_b.append(points)

    # Two sequences approaching the 3pi/4 direction from either side
    steps = np.arange(1, truncation + 1)
    toward_left = _planar(np.pi - (np.pi / 4) * (1.0 - 1.0 / steps), dim)
    toward_up = _planar(3 * np.pi / 4 - np.pi / (4 * steps), dim)

    embeddings = np.vstack([*clusters_a, toward_left, toward_up])
    embeddings_b = np.vstack([*clusters_b, _rotate_ccw(toward_left), toward_up])

    n_cluster = k * points_per_label
    n_sequence = 2 * truncation
    weights = np.concatenate(
        [np.full(n_cluster, (1.0 - sequence_mass) / n_cluster), np.full(n_sequence, sequence_mass / n_sequence)]
    )

    input_ids = (
        tuple(f"c{label}_{i}" for label in range(k) for i in range(points_per_label))
        + tuple(f"seq_n{n}" for n in steps)
        + tuple(f"seq_m{m}" for m in steps)
    )
    label_ids = tuple(f"y{j}" for j in range(k))
    logger.debug(f"Built theorem pair M={dim}, k={k}, rho={rho}, truncation={truncation}")
    return (
        ModelTable(embeddings, rho * first_dirs, input_ids, label_ids, weights),
        ModelTable(embeddings_b, rho * second_dirs, input_ids, label_ids, weights),
    )


def check_theorem_conditions(model: ModelTable, min_gap: float = 1e-12) -> List[int]:
    """
    Inputs violating the angular conditions: the cosine-closest unembedding
    must be unique and must also carry the highest probability.

    Returns:
        Indices of offending inputs; empty when the conditions hold
    """
    emb = model.embeddings / np.linalg.norm(model.embeddings, axis=1, keepdims=True)
    unemb = model.unembeddings / np.linalg.norm(model.unembeddings, axis=1, keepdims=True)
    cosines = emb @ unemb.T
    ordered = np.sort(cosines, axis=1)
    unique = ordered[:, -1] - ordered[:, -2] > min_gap
    agrees = np.argmax(cosines, axis=1) == np.argmax(model.embeddings @ model.unembeddings.T, axis=1)
    return [int(i) for i in np.flatnonzero(~(unique & agrees))]
