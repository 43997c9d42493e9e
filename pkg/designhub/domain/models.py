"""
Domain value types shared by every designhub module.

All models are frozen pydantic models: they are immutable values that can be
copied and handed between concurrent contexts freely.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Canonical 20-letter amino-acid alphabet
AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
_ALPHABET = frozenset(AMINO_ACIDS)


class QualityMetrics(BaseModel):
    """pLDDT / pTM / interchain pAE triple attached to a predicted structure"""
    model_config = ConfigDict(frozen=True)

    plddt: float = Field(..., ge=0.0, le=100.0, description="Confidence, higher is better")
    ptm: float = Field(..., ge=0.0, le=1.0, description="Predicted TM-score")
    iface_pae: float = Field(..., ge=0.0, description="Interchain pAE, lower is better")


class ScoreWeights(BaseModel):
    """Weights of the normalized composite score and the improvement margin"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    w_plddt: float = Field(1.0, ge=0.0)
    w_ptm: float = Field(1.0, ge=0.0)
    w_pae: float = Field(1.0, ge=0.0)
    epsilon: float = Field(0.0, ge=0.0)

    @model_validator(mode="after")
    def _some_weight(self) -> "ScoreWeights":
        if self.w_plddt + self.w_ptm + self.w_pae <= 0:
            raise ValueError("at least one score weight must be positive")
        return self


class CandidateSequence(BaseModel):
    """A designed sequence with its generator log-likelihood and batch rank"""
    model_config = ConfigDict(frozen=True)

    id: str
    residues: str
    log_likelihood: float
    source_structure: str
    rank: Optional[int] = Field(None, ge=1)
    # Synthetic runs only: hidden design quality used by the synthetic predictor
    latent_fitness: Optional[float] = Field(None, ge=0.0, le=1.0)

    @field_validator("residues")
    @classmethod
    def _canonical_residues(cls, value: str) -> str:
        if not value:
            raise ValueError("residues must be non-empty")
        bad = sorted(set(value) - _ALPHABET)
        if bad:
            raise ValueError(f"illegal residue characters: {''.join(bad)}")
        return value


class OriginKind(str, Enum):
    INITIAL = "initial"
    PREDICTED = "predicted"


class StructureOrigin(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: OriginKind = OriginKind.INITIAL
    cycle: Optional[int] = None
    sequence_id: Optional[str] = None


class ProteinStructure(BaseModel):
    """A structure reference; payload is an opaque path or inline content"""
    model_config = ConfigDict(frozen=True)

    id: str
    payload: str = ""
    origin: StructureOrigin = Field(default_factory=StructureOrigin)
    metrics: Optional[QualityMetrics] = None
    latent_fitness: Optional[float] = Field(None, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _metrics_iff_predicted(self) -> "ProteinStructure":
        predicted = self.origin.kind == OriginKind.PREDICTED
        if predicted and self.metrics is None:
            raise ValueError("predicted structures must carry metrics")
        if not predicted and self.metrics is not None:
            raise ValueError("initial structures never carry metrics")
        return self

    @property
    def is_initial(self) -> bool:
        return self.origin.kind == OriginKind.INITIAL


class DecisionKind(str, Enum):
    ACCEPT = "accept"
    RETRY = "retry"
    TERMINATE_LANE = "terminate_lane"
    COMPLETE_LANE = "complete_lane"


class TrajectoryRecord(BaseModel):
    """One prediction-and-scoring pass and the decision taken on it"""
    model_config = ConfigDict(frozen=True)

    trajectory_id: str
    pipeline_id: str
    lane: int
    structure_lineage: str
    cycle: int = Field(..., ge=1)
    retry: int = Field(0, ge=0)
    sequence: str
    metrics: QualityMetrics
    decision: DecisionKind

    @property
    def accepted(self) -> bool:
        return self.decision in (DecisionKind.ACCEPT, DecisionKind.COMPLETE_LANE)
