"""
Constructed model families: permuted-unembedding pairs, circle pairs and noise perturbations.
"""
from .circle import build_circle_pair, circle_unembeddings, cluster_labels, nearest_unembedding
from .families import (
    TABLE1_RHO,
    ConstructionKind,
    RhoFamily,
    perturb_embeddings,
    table1_family,
    theorem_family,
)
from .permutations import PermutationKind, PermutationSpec
from .sweeps import DEFAULT_SIGMAS, default_reference_model, perturbation_sweep, rho_sweep
from .theorem import build_theorem_pair, check_theorem_conditions, theorem_directions

__all__ = [
    "DEFAULT_SIGMAS",
    "TABLE1_RHO",
    "ConstructionKind",
    "PermutationKind",
    "PermutationSpec",
    "RhoFamily",
    "build_circle_pair",
    "build_theorem_pair",
    "check_theorem_conditions",
    "circle_unembeddings",
    "cluster_labels",
    "default_reference_model",
    "nearest_unembedding",
    "perturb_embeddings",
    "perturbation_sweep",
    "rho_sweep",
    "table1_family",
    "theorem_directions",
    "theorem_family",
]
