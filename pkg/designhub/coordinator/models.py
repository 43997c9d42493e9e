"""
Coordinator configuration, channel messages and the run report
"""

from pathlib import Path
from typing import Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..domain.models import QualityMetrics, ScoreWeights, TrajectoryRecord
from ..domain.scoring import DEFAULT_PAE_MAX
from ..errors import ReportSchemaError
from ..executors.base import TaskResult
from ..protocol.models import LaneStatus, PipelineSpec, Policy, ProtocolParams, TaskProfiles
from ..scheduler.scheduler import ScheduledEvent
from ..telemetry.makespan import MakespanBreakdown
from ..telemetry.series import CyclePoint


class SubpipelinePolicy(BaseModel):
    """When and how often low-quality lanes are re-processed"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    enabled: bool = False
    quality_quantile: float = Field(0.5, gt=0.0, lt=1.0)
    max_subpipelines: int = Field(0, ge=0)
    subpipeline_cycles: Optional[int] = Field(None, ge=1, description="Defaults to the parent's M")


class CoordinatorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    weights: ScoreWeights = Field(default_factory=ScoreWeights)
    pae_max: float = Field(DEFAULT_PAE_MAX, gt=0.0)
    subpipelines: SubpipelinePolicy = Field(default_factory=SubpipelinePolicy)
    final_cycle_adaptive: bool = True
    root_seed: int = 0
    profiles: TaskProfiles = Field(default_factory=TaskProfiles)
    max_inflight_tasks: Optional[int] = Field(None, ge=1)
    bootstrap_seconds: float = Field(5.0, ge=0.0)
    exec_setup_seconds: float = Field(1.0, ge=0.0)

    def protocol_params(self) -> ProtocolParams:
        return ProtocolParams(
            weights=self.weights,
            pae_max=self.pae_max,
            final_cycle_adaptive=self.final_cycle_adaptive,
            root_seed=self.root_seed,
            profiles=self.profiles,
        )


# Channel messages


class PipelineSubmission(BaseModel):
    model_config = ConfigDict(frozen=True)

    channel: Literal["pipeline"] = "pipeline"
    seq: int
    time: float
    spec: PipelineSpec


class TaskCompletion(BaseModel):
    model_config = ConfigDict(frozen=True)

    channel: Literal["completion"] = "completion"
    seq: int
    time: float
    result: TaskResult
    events: List[ScheduledEvent] = Field(default_factory=list)


# Report


class LaneSummary(BaseModel):
    lane: int
    lineage: str
    status: LaneStatus
    reason: Optional[str] = None
    cycles_accepted: int
    final_structure: Optional[str] = None
    final_metrics: Optional[QualityMetrics] = None
    final_score: Optional[float] = None
    metric_history: List[QualityMetrics] = Field(default_factory=list)


class PipelineSummary(BaseModel):
    id: str
    parent: Optional[str] = None
    policy: Policy
    lanes: List[LaneSummary]


class RunCounts(BaseModel):
    pipelines: int
    subpipelines: int
    lanes: int
    trajectories: int
    retries: int
    lanes_completed: int
    lanes_terminated: Dict[str, int] = Field(default_factory=dict)


class UtilizationSummary(BaseModel):
    cpu_pct: float
    gpu_pct: float
    cpu_cores_total: int
    gpus_total: int


class RunReport(BaseModel):
    """Everything a run produced; field order is the document order"""
    model_config = ConfigDict(extra="forbid")

    counts: RunCounts
    net_deltas: Dict[str, Optional[float]]
    final_composite_median: Optional[float] = None
    final_plddt_half_std: Optional[float] = None
    utilization: UtilizationSummary
    makespan: MakespanBreakdown
    cycles: List[CyclePoint] = Field(default_factory=list)
    pipelines: List[PipelineSummary]
    trajectories: List[TrajectoryRecord]

    def to_document(self) -> dict:
        return self.model_dump(mode="json")

    @classmethod
    def load(cls, path: str | Path) -> "RunReport":
        """Raises ReportSchemaError if the document is not a run report"""
        try:
            with open(path, "r") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ReportSchemaError(f"{path}: not valid YAML: {e}") from e
        if not isinstance(data, dict):
            raise ReportSchemaError(f"{path}: report must be a mapping")
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ReportSchemaError(f"{path}: {e.error_count()} schema error(s): {e}") from e
