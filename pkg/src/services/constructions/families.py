"""
Families of constructed pairs indexed by the unembedding norm rho, and the
noise-perturbation family.
"""
import logging
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from ...core.exceptions import InfeasibleConstructionError
from ...models.tables import ModelTable
from .circle import build_circle_pair
from .permutations import PermutationKind, PermutationSpec
from .theorem import build_theorem_pair

logger = logging.getLogger(__name__)

TABLE1_RHO = [3.0, 6.0, 9.0, 12.0, 15.0, 18.0]


class ConstructionKind(str, Enum):
    CIRCLE = "circle"
    THEOREM = "theorem"


class RhoFamily(BaseModel):
    """Constructed pairs sharing their embeddings, with unembedding norm rho."""

    rho_values: List[float] = Field(default_factory=lambda: list(TABLE1_RHO), description="Unembedding norms")
    construction: ConstructionKind = ConstructionKind.CIRCLE
    dim: int = Field(2, ge=2, description="Representation dimension M")
    k: int = Field(5, ge=3, description="Number of labels")
    points_per_label: int = Field(40, ge=1)
    permutation: PermutationKind = PermutationKind.DECORRELATING
    seed: int = 0
    truncation: int = Field(50, ge=1, description="Points kept from each input sequence")
    sequence_mass: float = Field(0.0, ge=0.0, lt=1.0)
    angular_half_width: Optional[float] = None
    radius: float = Field(1.0, gt=0.0, description="Median embedding norm of circle clusters")

    @field_validator("rho_values")
    @classmethod
    def _check_rho(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("rho_values must not be empty")
        if any(v <= 0 for v in values):
            raise ValueError("rho values must be positive")
        return values

    def permutation_spec(self) -> PermutationSpec:
        return PermutationSpec.for_kind(self.permutation, self.k)

    def build_pair(self, rho: float) -> Tuple[ModelTable, ModelTable]:
        if self.construction == ConstructionKind.THEOREM:
            return build_theorem_pair(
                dim=self.dim,
                k=self.k,
                rho=rho,
                truncation=self.truncation,
                points_per_label=self.points_per_label,
                seed=self.seed,
                sequence_mass=self.sequence_mass,
            )
        if self.dim != 2:
            raise InfeasibleConstructionError(f"circle construction is two-dimensional, got M={self.dim}")
        return build_circle_pair(
            k=self.k,
            rho=rho,
            points_per_label=self.points_per_label,
            permutation=self.permutation_spec(),
            seed=self.seed,
            angular_half_width=self.angular_half_width,
            radius=self.radius,
        )


TABLE1_K = 7
TABLE1_HALF_WIDTH = np.pi / (10 * TABLE1_K)
TABLE1_RADIUS = 2.0


def table1_family(rho_values: Optional[List[float]] = None, seed: int = 0, points_per_label: int = 40) -> RhoFamily:
    """
    Seven equally spaced clusters of norm-2 embeddings, half-width pi/70,
    with the decorrelating permutation j -> 2j mod 7.

    Every cluster is the same local pattern (offsets delta_i, radii r_i)
    rotated to its center theta_c. Both embedding means vanish, and each
    entry of the cross-covariance is a sum over i of r_i^2 times products
    such as cos(theta_c + delta_i) cos(2 theta_c + delta_i), summed over c.
    These reduce to sums over c of cos and sin of 3 theta_c + 2 delta_i and
    of theta_c, which vanish over the seven roots of unity. The
    cross-covariance is exactly zero, so every canonical correlation is 0,
    m_CCA = 0 and d_SVD = 1 for every projection of both models.

    Clusters as wide as pi/k - pi/(6k) push the distance ratio at rho = 3
    above 1e-3.
    """
    return RhoFamily(
        rho_values=list(rho_values) if rho_values is not None else list(TABLE1_RHO),
        construction=ConstructionKind.CIRCLE,
        k=TABLE1_K,
        points_per_label=points_per_label,
        permutation=PermutationKind.DECORRELATING,
        seed=seed,
        angular_half_width=TABLE1_HALF_WIDTH,
        radius=TABLE1_RADIUS,
    )


def theorem_family(dim: int = 2, k: int = 4, rho_values: Optional[List[float]] = None, seed: int = 0) -> RhoFamily:
    return RhoFamily(
        rho_values=list(rho_values) if rho_values is not None else list(TABLE1_RHO),
        construction=ConstructionKind.THEOREM,
        dim=dim,
        k=k,
        points_per_label=20,
        seed=seed,
    )


def perturb_embeddings(model: ModelTable, sigma: float, seed: int = 0) -> ModelTable:
    """Add i.i.d. N(0, sigma^2) noise to every embedding entry; unembeddings untouched."""
    if sigma < 0:
        raise InfeasibleConstructionError(f"sigma must be nonnegative, got {sigma}")
    noise = np.random.default_rng(seed).standard_normal(model.embeddings.shape)
    return model.with_embeddings(model.embeddings + sigma * noise)
