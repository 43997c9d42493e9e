"""Run configuration, config loading, report comparison and seed sweeps."""

from .compare import compare_reports
from .loader import apply_override, load_run_config
from .models import PipelineConfig, PoolConfig, RunConfig, StructureConfig
from .sweep import SeedOutcome, SweepResult, SweepSummary, final_cycle_drop, run_once, run_sweep, with_policy

__all__ = [
    "compare_reports",
    "apply_override",
    "load_run_config",
    "PipelineConfig",
    "PoolConfig",
    "RunConfig",
    "StructureConfig",
    "SeedOutcome",
    "SweepResult",
    "SweepSummary",
    "final_cycle_drop",
    "run_once",
    "run_sweep",
    "with_policy",
]
