"""Core value types, metric arithmetic, ranking and statistical summaries."""

from .models import (
    AMINO_ACIDS,
    CandidateSequence,
    DecisionKind,
    OriginKind,
    ProteinStructure,
    QualityMetrics,
    ScoreWeights,
    StructureOrigin,
    TrajectoryRecord,
)
from .scoring import DEFAULT_PAE_MAX, composite_score, improved, rank_sequences
from .stats import Summary, quantile, summarize

__all__ = [
    "AMINO_ACIDS",
    "CandidateSequence",
    "DecisionKind",
    "OriginKind",
    "ProteinStructure",
    "QualityMetrics",
    "ScoreWeights",
    "StructureOrigin",
    "TrajectoryRecord",
    "DEFAULT_PAE_MAX",
    "composite_score",
    "improved",
    "rank_sequences",
    "Summary",
    "quantile",
    "summarize",
]
