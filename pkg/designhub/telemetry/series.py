"""
Per-cycle metric series over accepted trajectories
"""

from collections import defaultdict
from typing import Dict, List, Sequence

from pydantic import BaseModel, ConfigDict

from ..domain.models import ScoreWeights, TrajectoryRecord
from ..domain.scoring import DEFAULT_PAE_MAX, composite_score
from ..domain.stats import summarize
from ..errors import ArgumentError

METRICS = ("plddt", "ptm", "iface_pae", "composite")


class CyclePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    cycle: int
    count: int
    medians: Dict[str, float]
    half_stds: Dict[str, float]


class MetricSeries(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: List[CyclePoint]
    # metric -> per-cycle lists of raw values, cycle 1 first
    values: Dict[str, List[List[float]]]

    def median(self, metric: str, cycle: int) -> float:
        return self.points[cycle - 1].medians[metric]


def metric_series(
    ledger: Sequence[TrajectoryRecord],
    weights: ScoreWeights | None = None,
    pae_max: float = DEFAULT_PAE_MAX,
) -> MetricSeries:
    """Group accepted records by cycle (across pipelines) and summarize each metric"""
    if not ledger:
        raise ArgumentError("cannot build a metric series from an empty ledger")

    by_cycle: Dict[int, Dict[str, List[float]]] = defaultdict(lambda: defaultdict(list))
    for record in ledger:
        if not record.accepted:
            continue
        bucket = by_cycle[record.cycle]
        bucket["plddt"].append(record.metrics.plddt)
        bucket["ptm"].append(record.metrics.ptm)
        bucket["iface_pae"].append(record.metrics.iface_pae)
        bucket["composite"].append(composite_score(record.metrics, weights, pae_max))

    if not by_cycle:
        raise ArgumentError("ledger holds no accepted trajectories")
    cycles = sorted(by_cycle)
    if cycles != list(range(1, len(cycles) + 1)):
        raise ArgumentError(f"accepted cycles are not contiguous from 1: {cycles}")

    points = []
    for cycle in cycles:
        summaries = {m: summarize(by_cycle[cycle][m]) for m in METRICS}
        points.append(CyclePoint(
            cycle=cycle,
            count=len(by_cycle[cycle]["plddt"]),
            medians={m: s.median for m, s in summaries.items()},
            half_stds={m: s.half_std for m, s in summaries.items()},
        ))
    values = {m: [by_cycle[c][m] for c in cycles] for m in METRICS}
    return MetricSeries(points=points, values=values)
