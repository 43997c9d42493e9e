"""Pluggable task executors: synthetic latent-fitness model and external subprocess tools."""

from .base import (
    ExecutorBase,
    GenerationOutput,
    GenerationPayload,
    PredictionOutput,
    PredictionPayload,
    Provenance,
    ResourceClass,
    TaskKind,
    TaskPhase,
    TaskResult,
    TaskSpec,
    TaskStatus,
    TaskTimings,
)
from .manager import ExecutorConfig, ExecutorManager, build_executor
from .subprocess import ParseRules, SubprocessExecutor, SubprocessParams, subprocess_execute
from .synthetic import (
    LatentFitness,
    SyntheticExecutor,
    SyntheticParams,
    derive_seed,
    synth_generate,
    synth_predict,
)

__all__ = [
    "ExecutorBase",
    "GenerationOutput",
    "GenerationPayload",
    "PredictionOutput",
    "PredictionPayload",
    "Provenance",
    "ResourceClass",
    "TaskKind",
    "TaskPhase",
    "TaskResult",
    "TaskSpec",
    "TaskStatus",
    "TaskTimings",
    "ExecutorConfig",
    "ExecutorManager",
    "build_executor",
    "ParseRules",
    "SubprocessExecutor",
    "SubprocessParams",
    "subprocess_execute",
    "LatentFitness",
    "SyntheticExecutor",
    "SyntheticParams",
    "derive_seed",
    "synth_generate",
    "synth_predict",
]
