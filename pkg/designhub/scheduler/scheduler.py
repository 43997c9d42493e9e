"""
Pilot-style slot scheduler.

Tasks wait in a FIFO queue and start first-fit with skip: every queued task
whose demand fits the free pool starts, and a blocked wide task does not hold
back smaller ones behind it. In simulated mode each task walks through its
phases on the discrete-event clock, releasing and re-acquiring resources at
every phase boundary. In wall mode a task holds its peak demand until the
coordinator reports completion.
"""

import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Tuple

import structlog
from pydantic import BaseModel, ConfigDict

from ..errors import ArgumentError, CapacityError, UnknownTaskError
from ..executors.base import TaskSpec
from .clock import Clock, quantize
from .pool import ResourcePool

logger = structlog.get_logger()


class EventKind(str, Enum):
    TASK_QUEUED = "TaskQueued"
    TASK_STARTED = "TaskStarted"
    PHASE_CHANGED = "PhaseChanged"
    ALLOC_FAILED_REQUEUED = "AllocFailedRequeued"
    TASK_FINISHED = "TaskFinished"


_KIND_ORDER = {kind: i for i, kind in enumerate(EventKind)}


class ScheduledEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    time: float
    kind: EventKind
    task_id: str
    cpu_delta: int = 0
    gpu_delta: int = 0

    def sort_key(self) -> Tuple[float, str, int]:
        return (self.time, self.task_id, _KIND_ORDER[self.kind])


# Timed transitions, ordered after time and task id
_SETUP_DONE = 0
_PHASE_END = 1


@dataclass
class _Running:
    task: TaskSpec
    phase: int = 0


@dataclass(order=True)
class _Timer:
    time: float
    task_id: str
    stage: int
    phase: int = field(compare=False, default=0)


class PilotScheduler:
    """Serialized scheduling domain over one resource pool"""

    def __init__(
        self,
        pool: ResourcePool,
        clock: Clock | None = None,
        exec_setup_seconds: float = 1.0,
    ):
        if exec_setup_seconds < 0:
            raise ArgumentError("exec_setup_seconds must be >= 0")
        self.pool = pool
        self.clock = clock or Clock()
        self.exec_setup_seconds = exec_setup_seconds

        self.pending: Deque[TaskSpec] = deque()
        # tasks that lost their resources at a phase boundary; served before pending
        self.boundary: Deque[str] = deque()
        self.running: Dict[str, _Running] = {}
        self.events: List[ScheduledEvent] = []
        self._by_task: Dict[str, List[ScheduledEvent]] = {}
        self._timers: List[_Timer] = []
        self._known: set = set()

    # Queries

    @property
    def idle(self) -> bool:
        return not self.pending and not self.running

    def events_for(self, task_id: str) -> List[ScheduledEvent]:
        return list(self._by_task.get(task_id, []))

    def is_running(self, task_id: str) -> bool:
        return task_id in self.running

    # Mutations

    def _emit(self, kind: EventKind, task_id: str, cpu: int = 0, gpu: int = 0) -> ScheduledEvent:
        event = ScheduledEvent(
            time=quantize(self.clock.now), kind=kind, task_id=task_id, cpu_delta=cpu, gpu_delta=gpu
        )
        self.events.append(event)
        self._by_task.setdefault(task_id, []).append(event)
        return event

    def submit(self, task: TaskSpec) -> ScheduledEvent:
        """Queue a task; raises CapacityError if it can never fit the pool"""
        if task.id in self._known:
            raise ArgumentError(f"task {task.id} already submitted")
        if not self.pool.can_ever_fit(task.cpu_cores, task.gpus):
            raise CapacityError(
                f"task {task.id} wants ({task.cpu_cores} cpu, {task.gpus} gpu) "
                f"but the pool has ({self.pool.cpu_cores_total} cpu, {self.pool.gpus_total} gpu)"
            )
        if self.clock.simulated and not task.phases:
            raise ArgumentError(f"task {task.id} has no phases; simulated mode needs them")

        self._known.add(task.id)
        self.pending.append(task)
        logger.debug("task_queued", task_id=task.id, cpu=task.cpu_cores, gpu=task.gpus)
        return self._emit(EventKind.TASK_QUEUED, task.id)

    def _initial_demand(self, task: TaskSpec) -> Tuple[int, int]:
        if self.clock.simulated:
            phase = task.phases[0]
            return phase.cpu_cores, phase.gpus
        return task.cpu_cores, task.gpus

    def _start_phase(self, run: _Running) -> None:
        phase = run.task.phases[run.phase]
        heapq.heappush(
            self._timers,
            _Timer(quantize(self.clock.now + phase.duration), run.task.id, _PHASE_END, run.phase),
        )

    def _dispatch(self) -> List[ScheduledEvent]:
        emitted: List[ScheduledEvent] = []

        for _ in range(len(self.boundary)):
            task_id = self.boundary.popleft()
            run = self.running[task_id]
            phase = run.task.phases[run.phase]
            if self.pool.fits(phase.cpu_cores, phase.gpus):
                self.pool.allocate(task_id, phase.cpu_cores, phase.gpus)
                emitted.append(self._emit(EventKind.PHASE_CHANGED, task_id, phase.cpu_cores, phase.gpus))
                self._start_phase(run)
            else:
                self.boundary.append(task_id)

        waiting: Deque[TaskSpec] = deque()
        while self.pending:
            task = self.pending.popleft()
            cpu, gpu = self._initial_demand(task)
            if not self.pool.fits(cpu, gpu):
                waiting.append(task)
                continue
            self.pool.allocate(task.id, cpu, gpu)
            run = _Running(task=task)
            self.running[task.id] = run
            emitted.append(self._emit(EventKind.TASK_STARTED, task.id, cpu, gpu))
            logger.debug("task_started", task_id=task.id, time=self.clock.now)
            if self.clock.simulated:
                heapq.heappush(
                    self._timers,
                    _Timer(quantize(self.clock.now + self.exec_setup_seconds), task.id, _SETUP_DONE),
                )
            else:
                emitted.append(self._emit(EventKind.PHASE_CHANGED, task.id))
        self.pending = waiting
        return emitted

    def _fire(self, timer: _Timer) -> List[ScheduledEvent]:
        run = self.running[timer.task_id]
        task_id = timer.task_id

        if timer.stage == _SETUP_DONE:
            event = self._emit(EventKind.PHASE_CHANGED, task_id)
            self._start_phase(run)
            return [event]

        if run.phase + 1 >= len(run.task.phases):
            cpu, gpu = self.pool.release(task_id)
            del self.running[task_id]
            logger.debug("task_finished", task_id=task_id, time=self.clock.now)
            return [self._emit(EventKind.TASK_FINISHED, task_id, -cpu, -gpu)]

        run.phase += 1
        nxt = run.task.phases[run.phase]
        cpu, gpu = self.pool.release(task_id)
        if self.pool.fits(nxt.cpu_cores, nxt.gpus):
            self.pool.allocate(task_id, nxt.cpu_cores, nxt.gpus)
            self._start_phase(run)
            return [self._emit(EventKind.PHASE_CHANGED, task_id, nxt.cpu_cores - cpu, nxt.gpus - gpu)]

        logger.debug("phase_alloc_failed", task_id=task_id, phase=run.phase)
        self.boundary.append(task_id)
        return [self._emit(EventKind.ALLOC_FAILED_REQUEUED, task_id, -cpu, -gpu)]

    def schedule_step(self) -> List[ScheduledEvent]:
        """
        Start everything that fits; if nothing can start, move the simulated
        clock to the next timed transition and apply it.

        Returns the events this step produced (empty when quiescent).
        """
        emitted = self._dispatch()
        if emitted or not self.clock.simulated or not self._timers:
            return emitted

        timer = heapq.heappop(self._timers)
        self.clock.advance_to(timer.time)
        return self._fire(timer)

    def complete(self, task_id: str) -> ScheduledEvent:
        """Wall mode: the task's execution ended; release everything it holds"""
        if self.clock.simulated:
            raise ArgumentError("simulated tasks finish on the scheduler clock")
        if task_id not in self.running:
            raise UnknownTaskError(f"task {task_id} is not running")
        cpu, gpu = self.pool.release(task_id)
        del self.running[task_id]
        return self._emit(EventKind.TASK_FINISHED, task_id, -cpu, -gpu)

    def next_timer(self) -> Optional[float]:
        return self._timers[0].time if self._timers else None

    def snapshot(self) -> dict:
        """Diagnostic view used in deadlock dumps"""
        return {
            "time": self.clock.now,
            "pool": repr(self.pool),
            "pending": [t.id for t in self.pending],
            "boundary": list(self.boundary),
            "running": sorted(self.running),
            "timers": len(self._timers),
        }
