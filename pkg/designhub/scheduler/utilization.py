"""
Resource utilization integrated from the scheduler's event trace
"""

from typing import List, NamedTuple, Sequence, Tuple

from ..errors import ArgumentError
from .pool import ResourcePool
from .scheduler import ScheduledEvent


class TimelinePoint(NamedTuple):
    time: float
    busy_cpu: int
    busy_gpu: int


class Utilization(NamedTuple):
    cpu_pct: float
    gpu_pct: float
    timeline: List[TimelinePoint]


def utilization(
    events: Sequence[ScheduledEvent],
    pool: ResourcePool,
    horizon: Tuple[float, float],
) -> Utilization:
    """
    Busy core-seconds over capacity-seconds, per resource class, in percent.

    The timeline is the step function of busy counts: one point per distinct
    event time inside the horizon, plus the horizon start.
    """
    t0, t1 = horizon
    if t1 <= t0:
        raise ArgumentError(f"empty horizon ({t0}, {t1})")

    ordered = sorted(events, key=lambda e: e.sort_key())
    busy_cpu = busy_gpu = 0
    i = 0
    while i < len(ordered) and ordered[i].time <= t0:
        busy_cpu += ordered[i].cpu_delta
        busy_gpu += ordered[i].gpu_delta
        i += 1

    timeline = [TimelinePoint(t0, busy_cpu, busy_gpu)]
    cpu_area = gpu_area = 0.0
    last = t0
    while i < len(ordered) and ordered[i].time < t1:
        t = ordered[i].time
        cpu_area += busy_cpu * (t - last)
        gpu_area += busy_gpu * (t - last)
        while i < len(ordered) and ordered[i].time == t:
            busy_cpu += ordered[i].cpu_delta
            busy_gpu += ordered[i].gpu_delta
            i += 1
        timeline.append(TimelinePoint(t, busy_cpu, busy_gpu))
        last = t
    cpu_area += busy_cpu * (t1 - last)
    gpu_area += busy_gpu * (t1 - last)

    span = t1 - t0
    cpu_pct = 100.0 * cpu_area / (pool.cpu_cores_total * span)
    gpu_pct = 100.0 * gpu_area / (pool.gpus_total * span) if pool.gpus_total else 0.0
    return Utilization(cpu_pct=cpu_pct, gpu_pct=gpu_pct, timeline=timeline)
