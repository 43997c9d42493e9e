"""The design-cycle state machine: task builders, FASTA codec, lane decisions."""

# fasta has no package-internal dependencies and must load first
from .fasta import LINE_WIDTH, compile_fasta, parse_fasta
from .models import (
    Action,
    DecisionOutcome,
    LaneFinished,
    LaneState,
    LaneStatus,
    PipelineEvent,
    PipelineSpec,
    PipelineStarted,
    PipelineState,
    Policy,
    ProtocolParams,
    RecordDecision,
    RecordTrajectory,
    SubmitTask,
    TaskCompleted,
    TaskProfiles,
    TerminationReason,
)
from .engine import (
    advance,
    build_generation_task,
    build_prediction_task,
    decide,
    generation_task_id,
    prediction_task_id,
)

__all__ = [
    "LINE_WIDTH",
    "compile_fasta",
    "parse_fasta",
    "Action",
    "DecisionOutcome",
    "LaneFinished",
    "LaneState",
    "LaneStatus",
    "PipelineEvent",
    "PipelineSpec",
    "PipelineStarted",
    "PipelineState",
    "Policy",
    "ProtocolParams",
    "RecordDecision",
    "RecordTrajectory",
    "SubmitTask",
    "TaskCompleted",
    "TaskProfiles",
    "TerminationReason",
    "advance",
    "build_generation_task",
    "build_prediction_task",
    "decide",
    "generation_task_id",
    "prediction_task_id",
]
