"""
Sample matrices and decomposition results used by the representational metrics.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..core.exceptions import ModelTableError, NonFiniteError
from .tables import check_weights, uniform_weights


@dataclass(frozen=True)
class SampleMatrix:
    """Joint samples of a random vector: one sample per row, with weights."""

    rows: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 2:
            raise ModelTableError("a sample matrix needs at least 2 rows")
        if not np.all(np.isfinite(rows)):
            bad = tuple(int(i) for i in np.argwhere(~np.isfinite(rows))[0])
            raise NonFiniteError("non-finite sample entry", index=bad)
        weights = check_weights(self.weights, rows.shape[0])
        rows = rows.copy()
        rows.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def of(cls, rows: np.ndarray, weights: Optional[np.ndarray] = None) -> "SampleMatrix":
        rows = np.asarray(rows, dtype=float)
        if weights is None:
            weights = uniform_weights(rows.shape[0])
        return cls(rows, weights)

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def mean(self) -> np.ndarray:
        return self.weights @ self.rows

    def centered(self) -> np.ndarray:
        return self.rows - self.mean()


@dataclass(frozen=True)
class SvdResult:
    """Singular triplets u_i, v_i, sigma_i of a cross-covariance matrix."""

    left: np.ndarray
    right: np.ndarray
    singular_values: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.T


@dataclass(frozen=True)
class PsiTerms:
    """
    psi_x over Y_LLV without y0 and psi_y over X_LLV.

    S and D are the diagonal matrices with entries 1/psi_x and 1/psi_y.
    """

    psi_x: np.ndarray
    psi_y: np.ndarray
    psi_x_labels: tuple
    psi_y_inputs: tuple
    violations: List = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def S(self, dim: Optional[int] = None) -> np.ndarray:
        values = self.psi_x if dim is None else self.psi_x[:dim]
        return np.diag(1.0 / values)

    def D(self) -> np.ndarray:
        return np.diag(1.0 / self.psi_y)
