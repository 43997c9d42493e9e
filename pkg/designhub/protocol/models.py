"""
Pipeline protocol models: specs, lane/pipeline state, decisions, events and actions
"""

from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..domain.models import (
    CandidateSequence,
    DecisionKind,
    ProteinStructure,
    QualityMetrics,
    ScoreWeights,
    TrajectoryRecord,
)
from ..domain.scoring import DEFAULT_PAE_MAX
from ..executors.base import ResourceClass, TaskPhase, TaskResult, TaskSpec


class Policy(str, Enum):
    ADAPTIVE = "adaptive"
    CONTROL = "control"


class TaskProfiles(BaseModel):
    """Resource demand and simulated duration of each task kind"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    generation_seconds: float = Field(10.0, ge=0.0)
    generation_cpu_cores: int = Field(1, ge=0)
    generation_gpus: int = Field(1, ge=0)

    prediction_seconds: float = Field(100.0, ge=0.0, description="T; split between the two phases")
    prediction_cpu_fraction: float = Field(0.8, ge=0.0, le=1.0)
    prediction_cpu_cores: int = Field(4, ge=0)
    prediction_gpus: int = Field(1, ge=0)

    def generation_phases(self) -> List[TaskPhase]:
        return [TaskPhase(
            resource_class=ResourceClass.GPU_BOUND,
            duration=self.generation_seconds,
            cpu_cores=self.generation_cpu_cores,
            gpus=self.generation_gpus,
        )]

    def prediction_phases(self) -> List[TaskPhase]:
        cpu_part = self.prediction_seconds * self.prediction_cpu_fraction
        return [
            TaskPhase(
                resource_class=ResourceClass.CPU_BOUND,
                duration=cpu_part,
                cpu_cores=self.prediction_cpu_cores,
            ),
            TaskPhase(
                resource_class=ResourceClass.GPU_BOUND,
                duration=self.prediction_seconds - cpu_part,
                gpus=self.prediction_gpus,
            ),
        ]


class PipelineSpec(BaseModel):
    """One design pipeline: input structures become independent lanes"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    input_structures: List[ProteinStructure] = Field(..., min_length=1)
    cycles: int = Field(4, ge=1, description="M design cycles")
    sequences_per_structure: int = Field(10, ge=1, description="K sequences per generation")
    retry_limit: int = Field(10, ge=0, description="R alternate sequences per cycle")
    policy: Policy = Policy.ADAPTIVE
    parent: Optional[str] = None
    generation_params: Dict[str, Any] = Field(default_factory=dict)
    # Root structure id per lane; defaults to the input structure ids
    lineages: Optional[List[str]] = None

    @model_validator(mode="after")
    def _consistent(self) -> "PipelineSpec":
        if self.parent is not None and self.parent == self.id:
            raise ValueError("a pipeline cannot be its own parent")
        if self.lineages is not None and len(self.lineages) != len(self.input_structures):
            raise ValueError("lineages must name one root per input structure")
        return self

    def lineage_of(self, lane: int) -> str:
        if self.lineages is not None:
            return self.lineages[lane]
        return self.input_structures[lane].id


class ProtocolParams(BaseModel):
    """Run-level constants every transition needs"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    weights: ScoreWeights = Field(default_factory=ScoreWeights)
    pae_max: float = Field(DEFAULT_PAE_MAX, gt=0.0)
    final_cycle_adaptive: bool = True
    root_seed: int = 0
    profiles: TaskProfiles = Field(default_factory=TaskProfiles)


class LaneStatus(str, Enum):
    GENERATING_SEQUENCES = "generating_sequences"
    AWAITING_PREDICTION = "awaiting_prediction"
    DECIDING = "deciding"
    ADVANCING = "advancing"
    TERMINATED = "terminated"
    COMPLETED = "completed"

    @property
    def absorbing(self) -> bool:
        return self in (LaneStatus.TERMINATED, LaneStatus.COMPLETED)


class TerminationReason(str, Enum):
    RETRY_BUDGET_EXHAUSTED = "retry_budget_exhausted"
    BATCH_EXHAUSTED = "batch_exhausted"
    TASK_FAILED = "task_failed"


class LaneState(BaseModel):
    """Progress of one input structure through the design cycles"""
    model_config = ConfigDict(frozen=True)

    lane: int
    lineage: str
    current_structure: ProteinStructure
    cycle: int = 1
    ranked_batch: Tuple[CandidateSequence, ...] = ()
    rank_in_flight: int = 0
    retries_this_cycle: int = 0
    last_accepted_metrics: Optional[QualityMetrics] = None
    last_accepted_structure: Optional[ProteinStructure] = None
    baseline_metrics: Optional[QualityMetrics] = None
    metric_history: Tuple[QualityMetrics, ...] = ()
    status: LaneStatus = LaneStatus.GENERATING_SEQUENCES
    termination_reason: Optional[TerminationReason] = None
    pending_task: Optional[str] = None

    @property
    def next_rank_to_try(self) -> int:
        return self.rank_in_flight + 1

    @property
    def in_flight_sequence(self) -> Optional[CandidateSequence]:
        if 1 <= self.rank_in_flight <= len(self.ranked_batch):
            return self.ranked_batch[self.rank_in_flight - 1]
        return None


class DecisionOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: DecisionKind
    new_structure: Optional[ProteinStructure] = None
    next_sequence: Optional[CandidateSequence] = None
    reason: Optional[TerminationReason] = None
    final_candidate: Optional[ProteinStructure] = None


class PipelineState(BaseModel):
    """Everything advance() needs; replaced, never mutated"""
    model_config = ConfigDict(frozen=True)

    spec: PipelineSpec
    params: ProtocolParams = Field(default_factory=ProtocolParams)
    lanes: Tuple[LaneState, ...]
    started: bool = False
    # task id -> lane, for tasks whose result has not been consumed yet
    task_index: Dict[str, int] = Field(default_factory=dict)

    @classmethod
    def initial(cls, spec: PipelineSpec, params: ProtocolParams | None = None) -> "PipelineState":
        lanes = tuple(
            LaneState(lane=i, lineage=spec.lineage_of(i), current_structure=s)
            for i, s in enumerate(spec.input_structures)
        )
        return cls(spec=spec, params=params or ProtocolParams(), lanes=lanes)

    @property
    def id(self) -> str:
        return self.spec.id

    @property
    def finished(self) -> bool:
        """Completed: every lane completed or terminated"""
        return self.started and all(lane.status.absorbing for lane in self.lanes)


# Events


class PipelineStarted(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["pipeline_started"] = "pipeline_started"
    pipeline_id: str


class TaskCompleted(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["task_completed"] = "task_completed"
    result: TaskResult


PipelineEvent = Union[PipelineStarted, TaskCompleted]


# Actions


class SubmitTask(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["submit_task"] = "submit_task"
    task: TaskSpec


class RecordTrajectory(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["record_trajectory"] = "record_trajectory"
    record: TrajectoryRecord


class RecordDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["record_decision"] = "record_decision"
    pipeline_id: str
    lane: int
    cycle: int
    retry: int
    outcome: DecisionKind
    score: Optional[float] = None
    detail: str = ""


class LaneFinished(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["lane_finished"] = "lane_finished"
    pipeline_id: str
    lane: int
    lineage: str
    status: LaneStatus
    reason: Optional[TerminationReason] = None
    final_structure: Optional[ProteinStructure] = None
    final_metrics: Optional[QualityMetrics] = None
    metric_history: Tuple[QualityMetrics, ...] = ()


Action = Union[SubmitTask, RecordTrajectory, RecordDecision, LaneFinished]
