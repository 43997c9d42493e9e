"""Pipelines coordinator: two-channel event loop, sub-pipeline spawning, replay."""

from .channels import COMPLETION_LOG, PIPELINE_LOG, Channel, ChannelLog, read_channel_logs
from .coordinator import Coordinator, replay, replay_dir, run
from .models import (
    CoordinatorConfig,
    LaneSummary,
    PipelineSubmission,
    PipelineSummary,
    RunCounts,
    RunReport,
    SubpipelinePolicy,
    TaskCompletion,
    UtilizationSummary,
)
from .report import build_report

__all__ = [
    "COMPLETION_LOG",
    "PIPELINE_LOG",
    "Channel",
    "ChannelLog",
    "read_channel_logs",
    "Coordinator",
    "replay",
    "replay_dir",
    "run",
    "CoordinatorConfig",
    "LaneSummary",
    "PipelineSubmission",
    "PipelineSummary",
    "RunCounts",
    "RunReport",
    "SubpipelinePolicy",
    "TaskCompletion",
    "UtilizationSummary",
    "build_report",
]
