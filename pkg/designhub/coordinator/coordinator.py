"""
Pipelines coordinator.

Owns every PipelineState and drives them from exactly two message channels:
pipeline submissions and task completions. Each loop iteration drains the
pipeline channel, drains completions into protocol.advance, spawns
sub-pipelines for low-quality lanes, hands queued tasks to the scheduler and
then lets the scheduler take one step.
"""

import asyncio
from collections import deque
from pathlib import Path
from typing import Deque, Dict, List, Optional, Sequence, Set, Tuple

import structlog

from ..domain.scoring import composite_score
from ..domain.stats import quantile
from ..errors import (
    ArgumentError,
    DeadlockError,
    ProtocolStateError,
    ReplayMismatchError,
    UnknownTaskError,
)
from ..executors.base import ExecutorBase, TaskResult, TaskSpec, TaskTimings
from ..protocol.engine import advance
from ..protocol.models import (
    Action,
    LaneFinished,
    LaneStatus,
    PipelineSpec,
    PipelineStarted,
    PipelineState,
    RecordDecision,
    RecordTrajectory,
    SubmitTask,
    TaskCompleted,
)
from ..scheduler.clock import Clock
from ..scheduler.pool import ResourcePool
from ..scheduler.scheduler import EventKind, PilotScheduler, ScheduledEvent
from ..telemetry.sink import DecisionRow, EventTrace
from .channels import COMPLETION_LOG, PIPELINE_LOG, open_channels, read_channel_logs
from .models import CoordinatorConfig, PipelineSubmission, RunReport, TaskCompletion
from .report import build_report

logger = structlog.get_logger()


class Coordinator:
    """Single logical consumer of the pipeline and completion channels"""

    def __init__(
        self,
        config: CoordinatorConfig,
        scheduler: PilotScheduler,
        executor: Optional[ExecutorBase] = None,
        log_dir: Optional[Path] = None,
    ):
        self.config = config
        self.params = config.protocol_params()
        self.scheduler = scheduler
        self.executor = executor
        self.trace = EventTrace()
        self.pipeline_channel, self.completion_channel = open_channels(log_dir)
        self.run_start = scheduler.clock.now

        self.pipelines: Dict[str, PipelineState] = {}
        self.ledger = []
        self.lane_outcomes: Dict[Tuple[str, int], LaneFinished] = {}
        self.reprocessed: Set[str] = set()

        self._submitted: Set[str] = set()
        self._subpipelines: Dict[str, Set[str]] = {}
        self._task_owner: Dict[str, str] = {}
        self._consumed: Set[str] = set()
        self._tasks: Dict[str, TaskSpec] = {}
        self._backlog: Deque[TaskSpec] = deque()
        self._inflight = 0
        self._executions: Dict[str, asyncio.Task] = {}
        self._lanes_finished = False
        self._replaying = False

    # Pipeline channel

    async def submit_pipeline(self, spec: PipelineSpec) -> str:
        """Put a pipeline on the submission channel; it starts when the loop consumes it"""
        if spec.id in self._submitted:
            raise ArgumentError(f"pipeline {spec.id} already submitted")
        if not spec.input_structures:
            raise ArgumentError(f"pipeline {spec.id} has no input structures")
        if spec.parent is not None and spec.parent not in self._submitted:
            raise ArgumentError(f"sub-pipeline {spec.id} names unknown parent {spec.parent}")

        self._note_submission(spec)
        message = PipelineSubmission(
            seq=self.pipeline_channel.next_seq(), time=self.scheduler.clock.now, spec=spec
        )
        await self.pipeline_channel.put(message)
        return spec.id

    def _note_submission(self, spec: PipelineSpec) -> None:
        self._submitted.add(spec.id)
        if spec.parent is not None:
            self._subpipelines.setdefault(spec.parent, set()).add(spec.id)
            self.reprocessed.update(spec.lineages or [s.id for s in spec.input_structures])

    def _apply_submission(self, message: PipelineSubmission) -> List[Action]:
        spec = message.spec
        if spec.id in self.pipelines:
            raise ReplayMismatchError(f"pipeline {spec.id} registered twice")
        self._note_submission(spec)
        state, actions = advance(
            PipelineState.initial(spec, self.params), PipelineStarted(pipeline_id=spec.id)
        )
        self.pipelines[spec.id] = state
        if spec.parent is not None:
            self.trace.record_decision(DecisionRow(
                time=message.time, kind="spawn", pipeline=spec.id, lane=0, cycle=0,
                detail=f"parent={spec.parent} lineage={spec.lineage_of(0)}",
            ))
        logger.info(
            "pipeline_submitted",
            pipeline_id=spec.id,
            parent=spec.parent,
            lanes=len(spec.input_structures),
            policy=spec.policy.value,
        )
        self._apply_actions(spec.id, actions, message.time)
        return actions

    def drain_pipeline_channel(self) -> int:
        messages = self.pipeline_channel.drain()
        for message in messages:
            self._apply_submission(message)
        return len(messages)

    # Completion channel

    def on_task_complete(self, result: TaskResult, time: Optional[float] = None) -> List[Action]:
        """
        Route one task result into its pipeline.

        Raises UnknownTaskError for a task no pipeline ever submitted; a
        duplicate delivery or a result for a finished pipeline is dropped.
        """
        pipeline_id = self._task_owner.get(result.task_id)
        if pipeline_id is None:
            raise UnknownTaskError(f"task {result.task_id} belongs to no pipeline")
        if result.task_id in self._consumed:
            logger.warning("duplicate_result_dropped", task_id=result.task_id)
            return []
        state = self.pipelines[pipeline_id]
        if state.finished:
            logger.warning(
                "result_for_finished_pipeline_dropped",
                task_id=result.task_id,
                pipeline_id=pipeline_id,
            )
            return []

        if not result.succeeded:
            logger.warning("task_failed", task_id=result.task_id, reason=result.reason)
        try:
            state, actions = advance(state, TaskCompleted(result=result))
        except ProtocolStateError as e:
            logger.warning("result_dropped", task_id=result.task_id, error=str(e))
            return []
        self._consumed.add(result.task_id)
        self.pipelines[pipeline_id] = state
        self._apply_actions(pipeline_id, actions, self.scheduler.clock.now if time is None else time)
        if state.finished:
            logger.info("pipeline_finished", pipeline_id=pipeline_id)
        return actions

    def _apply_actions(self, pipeline_id: str, actions: Sequence[Action], time: float) -> None:
        for action in actions:
            if isinstance(action, SubmitTask):
                task = action.task
                self._task_owner[task.id] = pipeline_id
                if not self._replaying:
                    self._tasks[task.id] = task
                    self._backlog.append(task)
            elif isinstance(action, RecordTrajectory):
                self.ledger.append(action.record)
            elif isinstance(action, RecordDecision):
                self.trace.record_decision(DecisionRow(
                    time=time,
                    kind=action.outcome.value,
                    pipeline=action.pipeline_id,
                    lane=action.lane,
                    cycle=action.cycle,
                    detail=action.detail,
                    score=action.score,
                ))
            elif isinstance(action, LaneFinished):
                self.lane_outcomes[(action.pipeline_id, action.lane)] = action
                self._lanes_finished = True
                logger.info(
                    "lane_completed" if action.status == LaneStatus.COMPLETED else "lane_terminated",
                    pipeline_id=action.pipeline_id,
                    lane=action.lane,
                    reason=action.reason.value if action.reason else None,
                    cycles=len(action.metric_history),
                )

    def drain_completion_channel(self) -> int:
        messages = self.completion_channel.drain()
        for message in messages:
            self.on_task_complete(message.result, message.time)
        return len(messages)

    # Sub-pipelines

    def maybe_spawn_subpipelines(self) -> List[PipelineSpec]:
        """
        Specs for re-processing finished lanes that score strictly below the
        quality quantile of all finished lanes. Pure selection: nothing is
        marked until the caller submits the specs.
        """
        policy = self.config.subpipelines
        budget = policy.max_subpipelines - sum(len(ids) for ids in self._subpipelines.values())
        if not policy.enabled or budget <= 0:
            return []

        scored = []
        for (pipeline_id, lane), outcome in self.lane_outcomes.items():
            if outcome.final_metrics is None or outcome.final_structure is None:
                continue
            score = composite_score(outcome.final_metrics, self.config.weights, self.config.pae_max)
            scored.append((score, pipeline_id, lane, outcome))
        if not scored:
            return []

        threshold = quantile([s for s, *_ in scored], policy.quality_quantile)
        eligible = sorted(
            (item for item in scored if item[0] < threshold and item[3].lineage not in self.reprocessed),
            key=lambda item: item[:3],
        )

        specs: List[PipelineSpec] = []
        numbering = {pid: len(ids) for pid, ids in self._subpipelines.items()}
        for _, pipeline_id, _, outcome in eligible[:budget]:
            parent = self.pipelines[pipeline_id].spec
            numbering[pipeline_id] = numbering.get(pipeline_id, 0) + 1
            specs.append(PipelineSpec(
                id=f"{pipeline_id}.sub{numbering[pipeline_id]}",
                input_structures=[outcome.final_structure],
                cycles=policy.subpipeline_cycles or parent.cycles,
                sequences_per_structure=parent.sequences_per_structure,
                retry_limit=parent.retry_limit,
                policy=parent.policy,
                parent=pipeline_id,
                generation_params=parent.generation_params,
                lineages=[outcome.lineage],
            ))
        return specs

    # Scheduler bridge

    def _flush_backlog(self) -> List[ScheduledEvent]:
        limit = self.config.max_inflight_tasks
        events = []
        while self._backlog and (limit is None or self._inflight < limit):
            task = self._backlog.popleft()
            events.append(self.scheduler.submit(task))
            self._inflight += 1
        self.trace.extend(events)
        return events

    async def _observe(self, events: Sequence[ScheduledEvent]) -> None:
        self.trace.extend(events)
        for event in events:
            if event.kind == EventKind.TASK_STARTED:
                task = self._tasks[event.task_id]
                self._executions[task.id] = asyncio.create_task(self.executor.execute(task))
            elif event.kind == EventKind.TASK_FINISHED:
                await self._finish_task(event)

    async def _finish_task(self, finished: ScheduledEvent) -> None:
        result = await self._executions.pop(finished.task_id)
        self._inflight -= 1
        task_events = self.scheduler.events_for(finished.task_id)
        first = {}
        for e in task_events:
            first.setdefault(e.kind, e.time)
        result = result.model_copy(update={"timings": TaskTimings(
            queued_at=first.get(EventKind.TASK_QUEUED, finished.time),
            started_at=first.get(EventKind.TASK_STARTED, finished.time),
            finished_at=finished.time,
        )})
        await self.completion_channel.put(TaskCompletion(
            seq=self.completion_channel.next_seq(),
            time=finished.time,
            result=result,
            events=task_events,
        ))

    async def _await_wall_completion(self) -> bool:
        if not self._executions:
            return False
        done, _ = await asyncio.wait(self._executions.values(), return_when=asyncio.FIRST_COMPLETED)
        finished_ids = sorted(tid for tid, t in self._executions.items() if t in done)
        for task_id in finished_ids:
            await self._observe([self.scheduler.complete(task_id)])
        return True

    # Loop

    @property
    def done(self) -> bool:
        return (
            bool(self.pipelines)
            and all(state.finished for state in self.pipelines.values())
            and self.pipeline_channel.empty()
            and self.completion_channel.empty()
            and not self._backlog
            and not self._executions
            and self.scheduler.idle
        )

    def diagnostics(self) -> dict:
        return {
            "scheduler": self.scheduler.snapshot(),
            "backlog": [t.id for t in self._backlog],
            "executions": sorted(self._executions),
            "pipelines": {
                pid: [lane.status.value for lane in state.lanes]
                for pid, state in sorted(self.pipelines.items())
            },
            "awaiting": sorted(
                tid for state in self.pipelines.values() for tid in state.task_index
            ),
        }

    async def run(self) -> RunReport:
        """Drive every submitted pipeline to completion and report"""
        if self.executor is None:
            raise ArgumentError("a live run needs an executor")
        if not self._submitted:
            raise ArgumentError("no pipeline submitted")
        clock = self.scheduler.clock
        if clock.simulated:
            clock.advance_to(self.run_start + self.config.bootstrap_seconds)
        logger.info("run_starting", pipelines=len(self._submitted), clock=clock.mode.value)

        try:
            while True:
                self.drain_pipeline_channel()
                self.drain_completion_channel()
                if self._lanes_finished:
                    self._lanes_finished = False
                    specs = self.maybe_spawn_subpipelines()
                    for spec in specs:
                        await self.submit_pipeline(spec)
                    if specs:
                        logger.info("subpipelines_spawned", ids=[s.id for s in specs])
                        self.drain_pipeline_channel()
                self._flush_backlog()
                if self.done:
                    break

                events = self.scheduler.schedule_step()
                if events:
                    await self._observe(events)
                    continue
                if not clock.simulated and await self._await_wall_completion():
                    continue
                if not self.completion_channel.empty():
                    continue

                dump = self.diagnostics()
                logger.error("deadlock_detected", **dump)
                raise DeadlockError("no task is running, none can start, and pipelines are live", dump)
        finally:
            for execution in self._executions.values():
                execution.cancel()

        report = self.report()
        logger.info(
            "run_completed",
            trajectories=report.counts.trajectories,
            subpipelines=report.counts.subpipelines,
            makespan=report.makespan.total,
        )
        return report

    def report(self, events: Optional[Sequence[ScheduledEvent]] = None) -> RunReport:
        return build_report(
            list(self.pipelines.values()),
            self.ledger,
            self.trace.events if events is None else events,
            self.scheduler.pool,
            self.config,
            self.run_start,
        )


async def run(
    specs: Sequence[PipelineSpec],
    pool: ResourcePool,
    executor: ExecutorBase,
    clock: Clock | None = None,
    config: CoordinatorConfig | None = None,
    log_dir: Optional[Path] = None,
) -> Tuple[RunReport, Coordinator]:
    """Run a set of pipelines to completion on a fresh scheduler"""
    if not specs:
        raise ArgumentError("at least one pipeline spec is required")
    config = config or CoordinatorConfig()
    scheduler = PilotScheduler(pool, clock or Clock(), exec_setup_seconds=config.exec_setup_seconds)
    coordinator = Coordinator(config, scheduler, executor, log_dir=log_dir)
    for spec in specs:
        await coordinator.submit_pipeline(spec)
    report = await coordinator.run()
    return report, coordinator


def replay(
    config: CoordinatorConfig,
    pool: ResourcePool,
    pipeline_log: Path,
    completion_log: Path,
) -> RunReport:
    """Rebuild a RunReport from the two channel logs alone"""
    coordinator = Coordinator(config, PilotScheduler(pool, Clock()))
    coordinator._replaying = True
    events: List[ScheduledEvent] = []

    for message in read_channel_logs(Path(pipeline_log), Path(completion_log)):
        if isinstance(message, PipelineSubmission):
            coordinator._apply_submission(message)
            continue
        try:
            actions = coordinator.on_task_complete(message.result, message.time)
        except UnknownTaskError as e:
            raise ReplayMismatchError(f"completion seq {message.seq}: {e}") from e
        if not actions:
            raise ReplayMismatchError(f"completion seq {message.seq} changed no pipeline")
        events.extend(message.events)

    if not all(state.finished for state in coordinator.pipelines.values()):
        raise ReplayMismatchError("channel logs end before every pipeline finished")
    return coordinator.report(events)


def replay_dir(config: CoordinatorConfig, pool: ResourcePool, run_dir: Path) -> RunReport:
    run_dir = Path(run_dir)
    return replay(config, pool, run_dir / PIPELINE_LOG, run_dir / COMPLETION_LOG)
