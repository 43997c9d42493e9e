"""
Base executor interface and the task/result wire types
"""

import time
from abc import ABC, abstractmethod
from collections import OrderedDict
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Union

import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import settings
from ..domain.models import CandidateSequence, ProteinStructure, QualityMetrics

logger = structlog.get_logger()


class TaskKind(str, Enum):
    SEQUENCE_GENERATION = "sequence_generation"
    STRUCTURE_PREDICTION = "structure_prediction"


class ResourceClass(str, Enum):
    CPU_BOUND = "cpu_bound"
    GPU_BOUND = "gpu_bound"


class TaskPhase(BaseModel):
    """One resource phase of a task; holds its own (cpu, gpu) demand"""
    model_config = ConfigDict(frozen=True)

    resource_class: ResourceClass
    duration: float = Field(..., ge=0.0, description="Simulated seconds")
    cpu_cores: int = Field(0, ge=0)
    gpus: int = Field(0, ge=0)


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    pipeline_id: str
    lane: int
    cycle: int
    retry: int = 0


class GenerationPayload(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["generation"] = "generation"
    structure: ProteinStructure
    num_sequences: int = Field(..., ge=1)
    generation_params: Dict[str, Any] = Field(default_factory=dict)


class PredictionPayload(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["prediction"] = "prediction"
    sequence: CandidateSequence
    fasta: str
    parent_structure_id: str


class TaskSpec(BaseModel):
    """A schedulable unit: peak demand, phase profile, payload, provenance"""
    model_config = ConfigDict(frozen=True)

    id: str
    kind: TaskKind
    cpu_cores: int = Field(..., ge=0)
    gpus: int = Field(..., ge=0)
    phases: List[TaskPhase] = Field(default_factory=list)
    payload: Union[GenerationPayload, PredictionPayload] = Field(..., discriminator="kind")
    provenance: Provenance

    @model_validator(mode="after")
    def _demands(self) -> "TaskSpec":
        if self.cpu_cores + self.gpus < 1:
            raise ValueError("a task must demand at least one core or GPU")
        for phase in self.phases:
            if phase.cpu_cores > self.cpu_cores or phase.gpus > self.gpus:
                raise ValueError(f"phase demand exceeds task peak demand in {self.id}")
        return self

    @property
    def duration(self) -> float:
        return sum(p.duration for p in self.phases)


class TaskStatus(str, Enum):
    SUCCEEDED = "succeeded"
    FAILED = "failed"


class TaskTimings(BaseModel):
    model_config = ConfigDict(frozen=True)

    queued_at: float = 0.0
    started_at: float = 0.0
    finished_at: float = 0.0

    @model_validator(mode="after")
    def _ordered(self) -> "TaskTimings":
        if not (self.queued_at <= self.started_at <= self.finished_at):
            raise ValueError("timings must satisfy queued <= started <= finished")
        return self


class GenerationOutput(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["generation"] = "generation"
    sequences: List[CandidateSequence]


class PredictionOutput(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["prediction"] = "prediction"
    structure: ProteinStructure
    metrics: QualityMetrics


class TaskResult(BaseModel):
    """Outcome of one task; exactly one per task id"""
    model_config = ConfigDict(frozen=True)

    task_id: str
    status: TaskStatus
    reason: Optional[str] = None
    outputs: Optional[Union[GenerationOutput, PredictionOutput]] = Field(None, discriminator="kind")
    timings: TaskTimings = Field(default_factory=TaskTimings)

    @model_validator(mode="after")
    def _outputs_when_succeeded(self) -> "TaskResult":
        if self.status == TaskStatus.SUCCEEDED and self.outputs is None:
            raise ValueError("a succeeded result must carry outputs")
        return self

    @property
    def succeeded(self) -> bool:
        return self.status == TaskStatus.SUCCEEDED

    @classmethod
    def failed(cls, task_id: str, reason: str) -> "TaskResult":
        return cls(task_id=task_id, status=TaskStatus.FAILED, reason=reason)


class ExecutorBase(ABC):
    """
    Base class for task executors.

    execute() is the public contract: it returns exactly one TaskResult per
    task id (repeat calls return the cached result) and converts any
    executor-specific exception into a FAILED result. The cache keeps the
    most recently used `cache_size` results.
    """

    name: str = "executor"

    def __init__(self, cache_size: int | None = None):
        self.cache_size = max(1, cache_size or settings.result_cache_size)
        self._results: "OrderedDict[str, TaskResult]" = OrderedDict()

    async def execute(self, task: TaskSpec) -> TaskResult:
        if task.id in self._results:
            self._results.move_to_end(task.id)
            return self._results[task.id]

        start = time.monotonic()
        try:
            result = await self._run(task)
        except Exception as e:
            logger.warning("task_execution_error", executor=self.name, task_id=task.id, error=str(e))
            result = TaskResult.failed(task.id, f"executor error: {e}")

        # Timings are stamped by the scheduler that owns the clock
        logger.debug(
            "task_executed",
            executor=self.name,
            task_id=task.id,
            status=result.status.value,
            latency_ms=int((time.monotonic() - start) * 1000),
        )
        self._results[task.id] = result
        if len(self._results) > self.cache_size:
            self._results.popitem(last=False)
        return result

    @abstractmethod
    async def _run(self, task: TaskSpec) -> TaskResult:
        """
        Execute a task.

        Args:
            task: Validated task specification

        Returns:
            The task's result; task-level failures are FAILED results
        """
        pass

    async def close(self) -> None:
        """Release executor resources"""
        pass
