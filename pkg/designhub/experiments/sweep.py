"""
Seed-batch experiments: the same inputs under the adaptive and control policies
"""

from typing import Dict, List, Optional, Sequence

import numpy as np
import structlog
from pydantic import BaseModel

from ..coordinator.coordinator import run
from ..coordinator.models import RunReport
from ..executors.manager import build_executor
from ..protocol.models import Policy
from .models import RunConfig

logger = structlog.get_logger()


class SeedOutcome(BaseModel):
    seed: int
    policy: Policy
    final_composite_median: Optional[float]
    final_plddt_half_std: Optional[float]
    final_cycle_drop: Optional[bool]
    trajectories: int


class SweepSummary(BaseModel):
    seeds: int
    adaptive_median_composite: Optional[float]
    control_median_composite: Optional[float]
    adaptive_wins: float
    adaptive_more_consistent: float
    adaptive_final_cycle_drops: float
    control_final_cycle_drops: float


class SweepResult(BaseModel):
    outcomes: List[SeedOutcome]
    summary: SweepSummary

    def by_policy(self, policy: Policy) -> Dict[int, SeedOutcome]:
        return {o.seed: o for o in self.outcomes if o.policy == policy}


def with_policy(config: RunConfig, policy: Policy, seed: int) -> RunConfig:
    """Same inputs and settings; control runs never spawn sub-pipelines"""
    pipelines = [p.model_copy(update={"policy": policy}) for p in config.pipelines]
    coordinator = config.coordinator
    if policy == Policy.CONTROL:
        coordinator = coordinator.model_copy(
            update={"subpipelines": coordinator.subpipelines.model_copy(update={"enabled": False})}
        )
    return config.model_copy(update={"pipelines": pipelines, "coordinator": coordinator, "seed": seed})


def final_cycle_drop(report: RunReport) -> Optional[bool]:
    """Whether the last cycle's median composite fell below the previous cycle's"""
    if len(report.cycles) < 2:
        return None
    last, previous = report.cycles[-1], report.cycles[-2]
    return last.medians["composite"] < previous.medians["composite"]


async def run_once(config: RunConfig) -> RunReport:
    executor = build_executor(config.executor_config(), root_seed=config.seed or 0)
    try:
        report, _ = await run(
            config.specs(),
            config.make_pool(),
            executor,
            config.make_clock(),
            config.coordinator_config(),
        )
    finally:
        await executor.close()
    return report


def _fraction(flags: Sequence[bool]) -> float:
    return sum(flags) / len(flags) if flags else 0.0


def _drop_rate(rows: Sequence[SeedOutcome]) -> float:
    return _fraction([r.final_cycle_drop for r in rows if r.final_cycle_drop is not None])


async def run_sweep(config: RunConfig, seeds: Sequence[int]) -> SweepResult:
    outcomes: List[SeedOutcome] = []
    for seed in seeds:
        for policy in (Policy.ADAPTIVE, Policy.CONTROL):
            report = await run_once(with_policy(config, policy, seed))
            outcomes.append(SeedOutcome(
                seed=seed,
                policy=policy,
                final_composite_median=report.final_composite_median,
                final_plddt_half_std=report.final_plddt_half_std,
                final_cycle_drop=final_cycle_drop(report),
                trajectories=report.counts.trajectories,
            ))
        logger.info("sweep_seed_done", seed=seed)

    adaptive = [o for o in outcomes if o.policy == Policy.ADAPTIVE]
    control = [o for o in outcomes if o.policy == Policy.CONTROL]
    pairs = [
        (a, c) for a, c in zip(adaptive, control)
        if a.final_composite_median is not None and c.final_composite_median is not None
    ]

    def median_of(rows: List[SeedOutcome]) -> Optional[float]:
        values = [r.final_composite_median for r in rows if r.final_composite_median is not None]
        return float(np.median(values)) if values else None

    summary = SweepSummary(
        seeds=len(seeds),
        adaptive_median_composite=median_of(adaptive),
        control_median_composite=median_of(control),
        adaptive_wins=_fraction([a.final_composite_median > c.final_composite_median for a, c in pairs]),
        adaptive_more_consistent=_fraction([
            a.final_plddt_half_std <= c.final_plddt_half_std
            for a, c in zip(adaptive, control)
            if a.final_plddt_half_std is not None and c.final_plddt_half_std is not None
        ]),
        adaptive_final_cycle_drops=_drop_rate(adaptive),
        control_final_cycle_drops=_drop_rate(control),
    )
    return SweepResult(outcomes=outcomes, summary=summary)
