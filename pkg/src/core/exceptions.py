"""
Exception hierarchy shared by every service.
"""
from typing import Any, List, Optional, Sequence


class LlvkitError(Exception):
    """Base class for all toolkit errors."""


class ModelTableError(LlvkitError, ValueError):
    """Malformed model table, weights or pivot indices."""


class NonFiniteError(LlvkitError, ValueError):
    """A logit, activation or table entry is not finite."""

    def __init__(self, message: str, index: Optional[Sequence[int]] = None, step: Optional[int] = None):
        super().__init__(message)
        self.index = tuple(index) if index is not None else None
        self.step = step


class GridMismatchError(LlvkitError, ValueError):
    """Two quantities were computed on different grids or measures."""


class PivotError(LlvkitError, ValueError):
    """Invalid pivot configuration."""


class NoFeasiblePivotError(PivotError):
    """Pivot search found no candidate satisfying the assumptions."""


class ProjectionError(LlvkitError, ValueError):
    """L or N is singular or cannot be formed."""

    def __init__(self, message: str, L_cond: float = float("inf"), N_cond: float = float("inf")):
        super().__init__(message)
        self.L_cond = L_cond
        self.N_cond = N_cond


class SingularMatrixError(LlvkitError, ValueError):
    """A matrix that must be invertible is numerically singular."""


class DegenerateVarianceError(LlvkitError, ValueError):
    """A sample component has zero variance."""

    def __init__(self, message: str, component: int):
        super().__init__(message)
        self.component = component


class AssumptionViolationError(LlvkitError, ValueError):
    """Some psi term vanished for one of the compared models."""

    def __init__(self, message: str, diagnostics: List[Any]):
        super().__init__(message)
        self.diagnostics = diagnostics


class InfeasibleConstructionError(LlvkitError, ValueError):
    """Requested construction parameters admit no valid model."""


class SchemaMismatchError(LlvkitError, ValueError):
    """Input file does not match the documented schema."""

    def __init__(self, message: str, diagnostics: List[Any]):
        super().__init__(message)
        self.diagnostics = diagnostics


class TrainingDivergenceError(LlvkitError, RuntimeError):
    """Loss or activations became non-finite during training."""

    def __init__(self, message: str, seed: int, step: int):
        super().__init__(f"{message} (seed={seed}, step={step})")
        self.seed = seed
        self.step = step
