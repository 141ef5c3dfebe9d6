"""
Typed records: model tables, samples, reports and run configurations.
"""
from .reports import (
    BoundCertificate,
    BoundSweepRecord,
    ComparisonBundle,
    Diagnostic,
    DistanceReport,
    DiversityCheck,
    InteriorLemmaCheck,
    LlvReport,
    PermutedPair,
    RhoSweepRecord,
    SimilarityReport,
    VarCorrComponent,
    WidthSweepResult,
    WidthSweepRow,
)
from .samples import PsiTerms, SampleMatrix, SvdResult
from .tables import CondLogProb, ModelPair, ModelTable, PivotConfig, ProjectionMatrices, default_pivots

__all__ = [
    "BoundCertificate",
    "BoundSweepRecord",
    "ComparisonBundle",
    "CondLogProb",
    "Diagnostic",
    "DistanceReport",
    "DiversityCheck",
    "InteriorLemmaCheck",
    "LlvReport",
    "ModelPair",
    "ModelTable",
    "PermutedPair",
    "PivotConfig",
    "ProjectionMatrices",
    "PsiTerms",
    "RhoSweepRecord",
    "SampleMatrix",
    "SimilarityReport",
    "SvdResult",
    "VarCorrComponent",
    "WidthSweepResult",
    "WidthSweepRow",
    "default_pivots",
]
