"""
Report models for distances, similarities and bound certificates.

All reports are pydantic models so they serialize to the JSON written by the
command-line front end.
"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from .. import __version__
from .tables import PivotConfig


# ============================================================================
# Diagnostics
# ============================================================================

class Diagnostic(BaseModel):
    """A soft failure or note attached to a report."""

    level: Literal["error", "warning", "info"] = Field(..., description="Severity")
    category: str = Field(..., description="assumption, diversity, covariance, retention, schema, ...")
    message: str = Field(..., description="Human-readable description")
    field: Optional[str] = Field(None, description="Offending quantity or schema location")
    suggestion: Optional[str] = Field(None, description="How to resolve the problem")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return self.model_dump()

    def __repr__(self) -> str:
        location = f" ({self.field})" if self.field else ""
        return f"[{self.level.upper()}] {self.message}{location}"


def errors_in(diagnostics: List[Diagnostic]) -> List[Diagnostic]:
    return [d for d in diagnostics if d.level == "error"]


def missing_fields(fields: List[str], source: str) -> List[Diagnostic]:
    """One schema error per required field absent from a file."""
    return [
        Diagnostic(level="error", category="schema", message=f"{source} lacks required field {name!r}", field=name)
        for name in fields
    ]


class DiversityCheck(BaseModel):
    """Outcome of the diversity condition on one model."""

    ok: bool
    L_cond: float
    N_cond: float


# ============================================================================
# Distributional Reports
# ============================================================================

class LlvReport(BaseModel):
    """Components and value of the log-likelihood variance distance."""

    t1: float
    t2: float
    t3: float
    t4: float
    lam: float = Field(..., serialization_alias="lambda", description="Weight of the psi-difference terms")
    value: float = Field(..., description="max{t1, t2, lambda*t3, lambda*t4}")
    pivots: PivotConfig
    violations: List[Diagnostic] = Field(default_factory=list)


class DistanceReport(BaseModel):
    """d_KL in both directions together with d_LLV."""

    d_kl_pq: float
    d_kl_qp: float
    llv: LlvReport


# ============================================================================
# Representational Reports
# ============================================================================

class SimilarityReport(BaseModel):
    """PLS-SVD and CCA similarity between two sampled representations."""

    m_svd: float
    d_svd: float
    singular_values: List[float]
    m_cca: Optional[float] = None
    n_samples: int


class InteriorLemmaCheck(BaseModel):
    """m_svd(z, w) against 1 - sqrt(M * sum_l Var[z'_l - w'_l])."""

    m_svd: float
    lower_bound: float
    holds: bool


class VarCorrComponent(BaseModel):
    """One component of the variance-correlation identity."""

    side: Literal["embedding", "unembedding"]
    index: int = Field(..., description="Label index for embeddings, input index for unembeddings")
    var_eps: float
    two_one_minus_corr: float
    gap: float


class BoundCertificate(BaseModel):
    """Checked implication d_LLV <= eps => max d_SVD <= 2 M eps."""

    epsilon: Optional[float] = Field(None, description="d_LLV value on the pivots")
    lhs_emb: Optional[float] = Field(None, description="d_svd(L^T f, L'^T f')")
    lhs_unemb: Optional[float] = Field(None, description="d_svd(N^T g, N'^T g')")
    rhs: Optional[float] = Field(None, description="2 * M * epsilon")
    holds: Optional[bool] = Field(None, description="Undefined when the left-hand sides cannot be formed")
    vacuous: bool = Field(False, description="rhs >= 1")
    preconditions_met: bool = False
    pivots: PivotConfig
    dim: int
    llv: Optional[LlvReport] = None
    interior_emb: Optional[InteriorLemmaCheck] = None
    interior_unemb: Optional[InteriorLemmaCheck] = None
    n_column_resamples: int = 0
    resampled_lhs_emb_max: Optional[float] = None
    resampled_holds: Optional[bool] = None
    diagnostics: List[Diagnostic] = Field(default_factory=list)

    @property
    def lhs(self) -> Optional[float]:
        if self.lhs_emb is None or self.lhs_unemb is None:
            return None
        return max(self.lhs_emb, self.lhs_unemb)


class ComparisonBundle(BaseModel):
    """Everything the compare command reports for one model pair."""

    version: str
    config: Dict[str, Any]
    distance: DistanceReport
    embedding_similarity: SimilarityReport
    certificate: BoundCertificate


# ============================================================================
# Sweep Records
# ============================================================================

class RhoSweepRecord(BaseModel):
    rho: float
    d_kl_pq: float
    d_kl_qp: float
    d_llv: float
    m_cca: float
    max_d_svd: Optional[float]


class BoundSweepRecord(BaseModel):
    param: float
    epsilon: Optional[float]
    lhs_emb: Optional[float]
    lhs_unemb: Optional[float]
    rhs: Optional[float]
    holds: Optional[bool]
    vacuous: bool


class WidthSweepRow(BaseModel):
    c: int
    width: int
    n_retained: int
    mean_d_llv: Optional[float]
    std_d_llv: Optional[float]
    mean_max_d_svd: Optional[float]
    std_max_d_svd: Optional[float]


class PermutedPair(BaseModel):
    """Two retained models whose unembeddings sit in different cyclic orders."""

    width: int
    seed_a: int
    seed_b: int
    order_a: List[int]
    order_b: List[int]
    accuracy_a: float
    accuracy_b: float
    m_cca: float = Field(..., description="Mean canonical correlation of the embeddings on the evaluation grid")
    d_llv: Optional[float] = Field(None, description="None when no feasible pivots exist for the pair")


class WidthSweepResult(BaseModel):
    """Rows, permuted pairs and diagnostics of one width sweep with the parameters that produced it."""

    version: str = Field(__version__, description="llvkit version that ran the sweep")
    config: Dict[str, Any] = Field(default_factory=dict, description="Resolved sweep parameters")
    c: int
    rows: List[WidthSweepRow]
    spearman: Optional[float] = Field(None, description="Rank correlation of width against mean d_LLV")
    permuted_pairs: List[PermutedPair] = Field(default_factory=list)
    diagnostics: List[Diagnostic] = Field(default_factory=list)
