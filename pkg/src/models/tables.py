"""
Finite-grid model tables, conditional log-probabilities and pivot configuration.

A model of the class p(y|x) = softmax(f(x)^T g(y)) is materialized on a
finite input set X and label set Y. Every metric in the toolkit is computed
exactly on these tables.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.special import logsumexp

from ..core.exceptions import GridMismatchError, ModelTableError, NonFiniteError, PivotError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


def _first_nonfinite(array: np.ndarray) -> Tuple[int, ...]:
    return tuple(int(i) for i in np.argwhere(~np.isfinite(array))[0])


def uniform_weights(n: int) -> np.ndarray:
    """Empirical weights 1/n for a dataset without duplicate inputs."""
    return np.full(n, 1.0 / n)


def check_weights(weights: np.ndarray, n: int, tol: float = 1e-9) -> np.ndarray:
    """Validate a weight vector and renormalize it to sum exactly to 1."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ModelTableError(f"weights must have shape ({n},), got {weights.shape}")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ModelTableError("weights must be finite and nonnegative")
    total = weights.sum()
    if abs(total - 1.0) > tol:
        raise ModelTableError(f"weights must sum to 1, got {total:.12g}")
    return weights / total


# ============================================================================
# Model Tables
# ============================================================================

@dataclass(frozen=True)
class ModelTable:
    """
    A model (f, g) evaluated on finite input and label sets.

    Attributes:
        embeddings: n x M matrix, row i is f(x_i)
        unembeddings: k x M matrix, row j is g(y_j)
        input_ids: n opaque input identifiers
        label_ids: k opaque label identifiers
        input_weights: optional empirical weights p_D(x); uniform when omitted
    """

    embeddings: np.ndarray
    unembeddings: np.ndarray
    input_ids: Tuple[str, ...] = ()
    label_ids: Tuple[str, ...] = ()
    input_weights: Optional[np.ndarray] = None

    def __post_init__(self):
        emb = np.asarray(self.embeddings, dtype=float)
        unemb = np.asarray(self.unembeddings, dtype=float)
        if emb.ndim != 2 or unemb.ndim != 2:
            raise ModelTableError("embeddings and unembeddings must be 2-D matrices")
        if emb.shape[1] != unemb.shape[1]:
            raise ModelTableError(
                f"embedding dimension {emb.shape[1]} differs from unembedding dimension {unemb.shape[1]}"
            )
        n, dim = emb.shape
        k = unemb.shape[0]
        if dim < 1:
            raise ModelTableError("representation dimension M must be at least 1")
        if n < dim + 1 or k < dim + 1:
            raise ModelTableError(f"need n >= M+1 and k >= M+1, got n={n}, k={k}, M={dim}")
        if not np.all(np.isfinite(emb)):
            raise NonFiniteError("non-finite embedding entry", index=_first_nonfinite(emb))
        if not np.all(np.isfinite(unemb)):
            raise NonFiniteError("non-finite unembedding entry", index=_first_nonfinite(unemb))

        input_ids = tuple(str(i) for i in self.input_ids) or tuple(f"x{i}" for i in range(n))
        label_ids = tuple(str(j) for j in self.label_ids) or tuple(f"y{j}" for j in range(k))
        if len(input_ids) != n or len(label_ids) != k:
            raise ModelTableError("identifier counts must match table rows")

        object.__setattr__(self, "embeddings", _frozen(emb))
        object.__setattr__(self, "unembeddings", _frozen(unemb))
        object.__setattr__(self, "input_ids", input_ids)
        object.__setattr__(self, "label_ids", label_ids)
        if self.input_weights is not None:
            object.__setattr__(self, "input_weights", _frozen(check_weights(self.input_weights, n)))

    @property
    def n(self) -> int:
        return self.embeddings.shape[0]

    @property
    def k(self) -> int:
        return self.unembeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def weights(self) -> np.ndarray:
        """Input weights, uniform when the table carries none."""
        if self.input_weights is None:
            return uniform_weights(self.n)
        return self.input_weights

    def with_embeddings(self, embeddings: np.ndarray) -> "ModelTable":
        return ModelTable(embeddings, self.unembeddings, self.input_ids, self.label_ids, self.input_weights)

    def with_unembeddings(self, unembeddings: np.ndarray) -> "ModelTable":
        return ModelTable(self.embeddings, unembeddings, self.input_ids, self.label_ids, self.input_weights)

    def same_grid(self, other: "ModelTable") -> bool:
        return (
            self.input_ids == other.input_ids
            and self.label_ids == other.label_ids
            and self.dim == other.dim
            and np.allclose(self.weights(), other.weights(), rtol=0.0, atol=1e-12)
        )


@dataclass(frozen=True)
class CondLogProb:
    """Matrix of log p(y|x) over the grid with the empirical input weights."""

    logp: np.ndarray
    input_weights: np.ndarray

    def __post_init__(self):
        logp = np.asarray(self.logp, dtype=float)
        if logp.ndim != 2:
            raise ModelTableError("logp must be an n x k matrix")
        weights = check_weights(self.input_weights, logp.shape[0])
        row_mass = logsumexp(logp, axis=1)
        worst = float(np.max(np.abs(row_mass)))
        if not np.isfinite(worst) or worst > 1e-10:
            raise ModelTableError(f"rows of logp must log-sum-exp to 0, worst deviation {worst:.3g}")
        object.__setattr__(self, "logp", _frozen(logp))
        object.__setattr__(self, "input_weights", _frozen(weights))

    @property
    def n(self) -> int:
        return self.logp.shape[0]

    @property
    def k(self) -> int:
        return self.logp.shape[1]

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.logp)


# ============================================================================
# Pivots
# ============================================================================

class PivotConfig(BaseModel):
    """Pivot input x0, input set X_LLV, pivot label y0 and label set Y_LLV."""

    x0_index: int = Field(..., ge=0, description="Pivot input x0")
    x_llv: List[int] = Field(..., description="Ordered M input indices, excluding x0")
    y0_index: int = Field(..., ge=0, description="Pivot label y0")
    y_llv: List[int] = Field(..., description="All labels except one, y0 included")
    excluded_label: int = Field(..., ge=0, description="The single label left out of Y_LLV")

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_structure(self) -> "PivotConfig":
        if self.x0_index in self.x_llv:
            raise ValueError("x0 must not appear in x_llv")
        if len(set(self.x_llv)) != len(self.x_llv):
            raise ValueError("x_llv contains duplicates")
        if len(set(self.y_llv)) != len(self.y_llv):
            raise ValueError("y_llv contains duplicates")
        if self.y0_index not in self.y_llv:
            raise ValueError("y0 must belong to y_llv")
        if self.excluded_label in self.y_llv:
            raise ValueError("excluded label must not belong to y_llv")
        return self

    @property
    def dim(self) -> int:
        return len(self.x_llv)

    @property
    def psi_labels(self) -> List[int]:
        """Y_LLV without y0, in y_llv order."""
        return [y for y in self.y_llv if y != self.y0_index]

    def projection_labels(self, dim: int) -> List[int]:
        """Labels whose displaced unembeddings form the columns of L."""
        return self.psi_labels[:dim]

    def check_against(self, n: int, k: int, dim: int) -> None:
        """Raise PivotError unless the config fits a grid with n inputs, k labels and dimension dim."""
        if len(self.x_llv) != dim:
            raise PivotError(f"x_llv must contain M={dim} inputs, got {len(self.x_llv)}")
        if len(self.y_llv) != k - 1:
            raise PivotError(f"y_llv must contain k-1={k - 1} labels, got {len(self.y_llv)}")
        inputs = [self.x0_index, *self.x_llv]
        labels = [*self.y_llv, self.excluded_label]
        if max(inputs) >= n:
            raise PivotError(f"input index {max(inputs)} out of range for n={n}")
        if max(labels) >= k:
            raise PivotError(f"label index {max(labels)} out of range for k={k}")


def default_pivots(n: int, k: int, dim: int) -> PivotConfig:
    """First-index pivots: x0=0, X_LLV=1..M, y0=0, last label excluded."""
    if n < dim + 1 or k < 3:
        raise PivotError(f"grid too small for pivots: n={n}, k={k}, M={dim}")
    return PivotConfig(
        x0_index=0,
        x_llv=list(range(1, dim + 1)),
        y0_index=0,
        y_llv=list(range(k - 1)),
        excluded_label=k - 1,
    )


@dataclass(frozen=True)
class ProjectionMatrices:
    """L (columns g0(y_i)) and N (columns f0(x_j)) with their condition numbers."""

    L: np.ndarray
    N: np.ndarray
    L_cond: float
    N_cond: float
    label_columns: Tuple[int, ...] = field(default=())
    input_columns: Tuple[int, ...] = field(default=())


@dataclass(frozen=True)
class ModelPair:
    """Two models on the same grid, compared under the first model's input weights."""

    first: ModelTable
    second: ModelTable

    def __post_init__(self):
        if not self.first.same_grid(self.second):
            raise GridMismatchError("models must share input ids, label ids, dimension and weights")

    @property
    def dim(self) -> int:
        return self.first.dim

    def weights(self) -> np.ndarray:
        return self.first.weights()

    def swapped(self) -> "ModelPair":
        return ModelPair(self.second, self.first)
