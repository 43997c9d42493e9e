"""
RunReport assembly from coordinator state and the scheduler trace
"""

from collections import Counter
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..domain.models import TrajectoryRecord
from ..domain.scoring import composite_score
from ..domain.stats import summarize
from ..errors import ArgumentError
from ..protocol.models import LaneStatus, PipelineState
from ..scheduler.pool import ResourcePool
from ..scheduler.scheduler import ScheduledEvent
from ..scheduler.utilization import utilization
from ..telemetry.makespan import makespan
from ..telemetry.series import metric_series
from .models import (
    CoordinatorConfig,
    LaneSummary,
    PipelineSummary,
    RunCounts,
    RunReport,
    UtilizationSummary,
)

_DELTA_METRICS = ("plddt", "ptm", "iface_pae", "composite")


def _median(values: List[float]) -> Optional[float]:
    return float(np.median(values)) if values else None


def build_report(
    pipelines: Sequence[PipelineState],
    ledger: Sequence[TrajectoryRecord],
    events: Sequence[ScheduledEvent],
    pool: ResourcePool,
    config: CoordinatorConfig,
    run_start: float = 0.0,
) -> RunReport:
    w, pae_max = config.weights, config.pae_max

    def score(m) -> float:
        return composite_score(m, w, pae_max)

    summaries: List[PipelineSummary] = []
    initial: Dict[str, List[float]] = {m: [] for m in _DELTA_METRICS}
    final: Dict[str, List[float]] = {m: [] for m in _DELTA_METRICS}
    terminated: Counter = Counter()
    completed = 0

    for state in pipelines:
        lanes = []
        for lane in state.lanes:
            final_metrics = lane.last_accepted_metrics
            if lane.status == LaneStatus.COMPLETED:
                completed += 1
            elif lane.termination_reason is not None:
                terminated[lane.termination_reason.value] += 1
            lanes.append(LaneSummary(
                lane=lane.lane,
                lineage=lane.lineage,
                status=lane.status,
                reason=lane.termination_reason.value if lane.termination_reason else None,
                cycles_accepted=len(lane.metric_history),
                final_structure=lane.last_accepted_structure.id if lane.last_accepted_structure else None,
                final_metrics=final_metrics,
                final_score=score(final_metrics) if final_metrics else None,
                metric_history=list(lane.metric_history),
            ))
            if final_metrics is not None and lane.baseline_metrics is not None:
                for source, target in ((lane.baseline_metrics, initial), (final_metrics, final)):
                    target["plddt"].append(source.plddt)
                    target["ptm"].append(source.ptm)
                    target["iface_pae"].append(source.iface_pae)
                    target["composite"].append(score(source))
        summaries.append(PipelineSummary(
            id=state.id, parent=state.spec.parent, policy=state.spec.policy, lanes=lanes,
        ))

    net_deltas = {}
    for m in _DELTA_METRICS:
        lo, hi = _median(initial[m]), _median(final[m])
        net_deltas[m] = None if lo is None else hi - lo

    breakdown = makespan(events, run_start)
    end = run_start + breakdown.total
    if end > run_start:
        util = utilization(events, pool, (run_start, end))
        cpu_pct, gpu_pct = util.cpu_pct, util.gpu_pct
    else:
        cpu_pct = gpu_pct = 0.0

    try:
        cycles = metric_series(ledger, w, pae_max).points
    except ArgumentError:
        cycles = []

    return RunReport(
        counts=RunCounts(
            pipelines=sum(1 for s in pipelines if s.spec.parent is None),
            subpipelines=sum(1 for s in pipelines if s.spec.parent is not None),
            lanes=sum(len(s.lanes) for s in pipelines),
            trajectories=len(ledger),
            retries=sum(1 for r in ledger if r.retry > 0),
            lanes_completed=completed,
            lanes_terminated=dict(sorted(terminated.items())),
        ),
        net_deltas=net_deltas,
        final_composite_median=_median(final["composite"]),
        final_plddt_half_std=summarize(final["plddt"]).half_std if final["plddt"] else None,
        utilization=UtilizationSummary(
            cpu_pct=cpu_pct,
            gpu_pct=gpu_pct,
            cpu_cores_total=pool.cpu_cores_total,
            gpus_total=pool.gpus_total,
        ),
        makespan=breakdown,
        cycles=cycles,
        pipelines=summaries,
        trajectories=list(ledger),
    )
