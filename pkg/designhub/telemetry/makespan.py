"""
Makespan phase breakdown: bootstrap, exec setup and running.

A task is set up from TaskStarted to its first PhaseChanged and runs from
there to TaskFinished. Across tasks the phases are measured as envelopes
(interval unions): running is the union of running intervals, and exec setup
counts only setup time during which nothing was running, so the three phases
never overlap and their sum stays within the total.
"""

from typing import Dict, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from ..errors import IncompleteRunError
from ..scheduler.scheduler import EventKind, ScheduledEvent

Interval = Tuple[float, float]


class MakespanBreakdown(BaseModel):
    model_config = ConfigDict(frozen=True)

    bootstrap: float
    exec_setup: float
    running: float
    total: float
    # per-task sums, overlapping across tasks
    exec_setup_task_sum: float
    running_task_sum: float


def union_length(intervals: Sequence[Interval]) -> float:
    total = 0.0
    cur_start = cur_end = None
    for start, end in sorted(intervals):
        if cur_end is None or start > cur_end:
            if cur_end is not None:
                total += cur_end - cur_start
            cur_start, cur_end = start, end
        else:
            cur_end = max(cur_end, end)
    if cur_end is not None:
        total += cur_end - cur_start
    return total


def makespan(events: Sequence[ScheduledEvent], run_start: float = 0.0) -> MakespanBreakdown:
    """Raises IncompleteRunError for an empty trace or a task that never finished"""
    queued: Dict[str, float] = {}
    started: Dict[str, float] = {}
    executing: Dict[str, float] = {}
    finished: Dict[str, float] = {}

    for e in sorted(events, key=lambda e: e.sort_key()):
        if e.kind == EventKind.TASK_QUEUED:
            queued.setdefault(e.task_id, e.time)
        elif e.kind == EventKind.TASK_STARTED:
            started.setdefault(e.task_id, e.time)
        elif e.kind == EventKind.PHASE_CHANGED:
            executing.setdefault(e.task_id, e.time)
        elif e.kind == EventKind.TASK_FINISHED:
            finished[e.task_id] = e.time

    if not queued:
        raise IncompleteRunError("incomplete run")
    unfinished = sorted(set(queued) - set(finished))
    if unfinished:
        raise IncompleteRunError(f"incomplete run: {len(unfinished)} task(s) never finished")

    setup: List[Interval] = []
    running: List[Interval] = []
    for task_id, end in finished.items():
        begin = started.get(task_id, end)
        exec_start = executing.get(task_id, begin)
        setup.append((begin, exec_start))
        running.append((exec_start, end))

    running_envelope = union_length(running)
    setup_only = union_length(setup + running) - running_envelope
    return MakespanBreakdown(
        bootstrap=min(queued.values()) - run_start,
        exec_setup=setup_only,
        running=running_envelope,
        total=max(finished.values()) - run_start,
        exec_setup_task_sum=sum(b - a for a, b in setup),
        running_task_sum=sum(b - a for a, b in running),
    )
