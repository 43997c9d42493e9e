"""
Pipeline protocol engine.

advance() is the only way a PipelineState changes: it is a pure function of
(state, event) returning the next state plus the actions the coordinator must
carry out. Nothing here performs I/O or reads a clock.
"""

from typing import List, Optional, Tuple

import numpy as np
import structlog

from ..domain.models import (
    CandidateSequence,
    DecisionKind,
    ProteinStructure,
    QualityMetrics,
    ScoreWeights,
    TrajectoryRecord,
)
from ..domain.scoring import DEFAULT_PAE_MAX, composite_score, improved, rank_sequences
from ..errors import ArgumentError, MetricDomainError, ProtocolStateError, UnknownTaskError
from ..executors.base import (
    GenerationOutput,
    GenerationPayload,
    PredictionOutput,
    PredictionPayload,
    Provenance,
    TaskKind,
    TaskResult,
    TaskSpec,
)
from ..executors.synthetic import derive_seed
from .fasta import compile_fasta
from .models import (
    Action,
    DecisionOutcome,
    LaneFinished,
    LaneState,
    LaneStatus,
    PipelineEvent,
    PipelineSpec,
    PipelineStarted,
    PipelineState,
    Policy,
    RecordDecision,
    RecordTrajectory,
    SubmitTask,
    TaskCompleted,
    TaskProfiles,
    TerminationReason,
)

logger = structlog.get_logger()


def generation_task_id(pipeline_id: str, lane: int, cycle: int) -> str:
    return f"{pipeline_id}.l{lane}.c{cycle}.gen"


def prediction_task_id(pipeline_id: str, lane: int, cycle: int, retry: int) -> str:
    return f"{pipeline_id}.l{lane}.c{cycle}.pred.r{retry}"


def build_generation_task(
    structure: ProteinStructure,
    spec: PipelineSpec,
    lane: int = 0,
    cycle: int = 1,
    profiles: TaskProfiles | None = None,
) -> TaskSpec:
    """Generation task: generate K sequences for one structure"""
    profiles = profiles or TaskProfiles()
    phases = profiles.generation_phases()
    return TaskSpec(
        id=generation_task_id(spec.id, lane, cycle),
        kind=TaskKind.SEQUENCE_GENERATION,
        cpu_cores=max(p.cpu_cores for p in phases),
        gpus=max(p.gpus for p in phases),
        phases=phases,
        payload=GenerationPayload(
            structure=structure,
            num_sequences=spec.sequences_per_structure,
            generation_params=spec.generation_params,
        ),
        provenance=Provenance(pipeline_id=spec.id, lane=lane, cycle=cycle),
    )


def build_prediction_task(
    sequence: CandidateSequence,
    spec: PipelineSpec,
    lane: int = 0,
    cycle: int = 1,
    retry: int = 0,
    parent_structure_id: str | None = None,
    profiles: TaskProfiles | None = None,
) -> TaskSpec:
    """Prediction task: compile the chosen sequence to FASTA and predict its structure"""
    profiles = profiles or TaskProfiles()
    phases = profiles.prediction_phases()
    return TaskSpec(
        id=prediction_task_id(spec.id, lane, cycle, retry),
        kind=TaskKind.STRUCTURE_PREDICTION,
        cpu_cores=max(p.cpu_cores for p in phases),
        gpus=max(p.gpus for p in phases),
        phases=phases,
        payload=PredictionPayload(
            sequence=sequence,
            fasta=compile_fasta([sequence]),
            parent_structure_id=parent_structure_id or sequence.source_structure,
        ),
        provenance=Provenance(pipeline_id=spec.id, lane=lane, cycle=cycle, retry=retry),
    )


def decide(
    lane_state: LaneState,
    new_metrics: QualityMetrics,
    predicted: ProteinStructure,
    w: ScoreWeights | None = None,
    spec: PipelineSpec | None = None,
    pae_max: float = DEFAULT_PAE_MAX,
    final_cycle_adaptive: bool = True,
) -> DecisionOutcome:
    """
    Lane decision: accept, retry with the next-ranked sequence, or end the lane.

    An acceptance in the last cycle is a CompleteLane. Retries stop when the
    retry budget is spent (checked first) or the ranked batch runs out.
    """
    if lane_state.status != LaneStatus.DECIDING:
        raise ProtocolStateError(
            f"lane {lane_state.lane} is {lane_state.status.value}, not deciding"
        )
    if spec is None:
        raise ArgumentError("decide needs the pipeline spec")
    w = w or ScoreWeights()

    last_cycle = lane_state.cycle >= spec.cycles
    accept = (
        DecisionOutcome(kind=DecisionKind.COMPLETE_LANE, final_candidate=predicted)
        if last_cycle
        else DecisionOutcome(kind=DecisionKind.ACCEPT, new_structure=predicted)
    )

    if spec.policy == Policy.CONTROL:
        return accept
    if lane_state.last_accepted_metrics is None:
        return accept
    if last_cycle and not final_cycle_adaptive:
        return accept
    if improved(lane_state.last_accepted_metrics, new_metrics, w, pae_max):
        return accept

    batch_size = min(spec.sequences_per_structure, len(lane_state.ranked_batch))
    if lane_state.retries_this_cycle >= spec.retry_limit:
        return DecisionOutcome(
            kind=DecisionKind.TERMINATE_LANE,
            reason=TerminationReason.RETRY_BUDGET_EXHAUSTED,
        )
    if lane_state.next_rank_to_try > batch_size:
        return DecisionOutcome(
            kind=DecisionKind.TERMINATE_LANE,
            reason=TerminationReason.BATCH_EXHAUSTED,
        )
    return DecisionOutcome(
        kind=DecisionKind.RETRY,
        next_sequence=lane_state.ranked_batch[lane_state.next_rank_to_try - 1],
    )


def _replace_lane(state: PipelineState, lane: LaneState, task_index: dict) -> PipelineState:
    lanes = list(state.lanes)
    lanes[lane.lane] = lane
    return state.model_copy(update={"lanes": tuple(lanes), "task_index": task_index})


def _submit(task: TaskSpec, lane: LaneState, task_index: dict) -> Tuple[LaneState, SubmitTask]:
    task_index[task.id] = lane.lane
    return lane.model_copy(update={"pending_task": task.id}), SubmitTask(task=task)


def _finish(state: PipelineState, lane: LaneState) -> LaneFinished:
    return LaneFinished(
        pipeline_id=state.id,
        lane=lane.lane,
        lineage=lane.lineage,
        status=lane.status,
        reason=lane.termination_reason,
        final_structure=lane.last_accepted_structure,
        final_metrics=lane.last_accepted_metrics,
        metric_history=lane.metric_history,
    )


def _terminate(
    state: PipelineState, lane: LaneState, reason: TerminationReason, detail: str = ""
) -> Tuple[LaneState, List[Action]]:
    lane = lane.model_copy(update={
        "status": LaneStatus.TERMINATED,
        "termination_reason": reason,
        "pending_task": None,
    })
    decision = RecordDecision(
        pipeline_id=state.id,
        lane=lane.lane,
        cycle=lane.cycle,
        retry=lane.retries_this_cycle,
        outcome=DecisionKind.TERMINATE_LANE,
        detail=detail or reason.value,
    )
    return lane, [decision, _finish(state, lane)]


def _choose_sequence(state: PipelineState, ranked: List[CandidateSequence], task_id: str) -> int:
    """Rank of the sequence sent to prediction first"""
    if state.spec.policy == Policy.CONTROL:
        rng = np.random.default_rng(derive_seed(state.params.root_seed, task_id))
        return int(rng.integers(len(ranked))) + 1
    return 1


def _on_start(state: PipelineState) -> Tuple[PipelineState, List[Action]]:
    if state.started:
        raise ProtocolStateError(f"pipeline {state.id} already started")
    task_index: dict = {}
    lanes = []
    actions: List[Action] = []
    for lane in state.lanes:
        task = build_generation_task(
            lane.current_structure, state.spec, lane.lane, lane.cycle, state.params.profiles
        )
        lane, action = _submit(task, lane, task_index)
        lanes.append(lane)
        actions.append(action)
    return state.model_copy(
        update={"lanes": tuple(lanes), "started": True, "task_index": task_index}
    ), actions


def _on_generation(
    state: PipelineState, lane: LaneState, result: TaskResult, task_index: dict
) -> Tuple[LaneState, List[Action]]:
    outputs = result.outputs
    if not isinstance(outputs, GenerationOutput):
        raise ProtocolStateError(f"{result.task_id}: expected a generation output")
    try:
        ranked = rank_sequences(outputs.sequences)
    except (ArgumentError, MetricDomainError) as e:
        return _terminate(state, lane, TerminationReason.TASK_FAILED, f"unusable batch: {e}")

    rank = _choose_sequence(state, ranked, result.task_id)
    lane = lane.model_copy(update={
        "ranked_batch": tuple(ranked),
        "rank_in_flight": rank,
        "retries_this_cycle": 0,
        "status": LaneStatus.AWAITING_PREDICTION,
    })
    task = build_prediction_task(
        ranked[rank - 1],
        state.spec,
        lane.lane,
        lane.cycle,
        retry=0,
        parent_structure_id=lane.current_structure.id,
        profiles=state.params.profiles,
    )
    lane, action = _submit(task, lane, task_index)
    return lane, [action]


def _on_prediction(
    state: PipelineState, lane: LaneState, result: TaskResult, task_index: dict
) -> Tuple[LaneState, List[Action]]:
    outputs = result.outputs
    if not isinstance(outputs, PredictionOutput):
        raise ProtocolStateError(f"{result.task_id}: expected a prediction output")
    params = state.params
    sequence = lane.in_flight_sequence

    def trajectory(decision: DecisionKind) -> RecordTrajectory:
        return RecordTrajectory(record=TrajectoryRecord(
            trajectory_id=result.task_id,
            pipeline_id=state.id,
            lane=lane.lane,
            structure_lineage=lane.lineage,
            cycle=lane.cycle,
            retry=lane.retries_this_cycle,
            sequence=sequence.id if sequence else outputs.structure.origin.sequence_id or "",
            metrics=outputs.metrics,
            decision=decision,
        ))

    try:
        score = composite_score(outputs.metrics, params.weights, params.pae_max)
    except MetricDomainError as e:
        # an out-of-range evaluation is still a trajectory
        record = trajectory(DecisionKind.TERMINATE_LANE)
        lane, finish_actions = _terminate(state, lane, TerminationReason.TASK_FAILED, str(e))
        return lane, [record, *finish_actions]

    deciding = lane.model_copy(update={"status": LaneStatus.DECIDING, "pending_task": None})
    outcome = decide(
        deciding,
        outputs.metrics,
        outputs.structure,
        params.weights,
        spec=state.spec,
        pae_max=params.pae_max,
        final_cycle_adaptive=params.final_cycle_adaptive,
    )

    actions: List[Action] = [trajectory(outcome.kind)]

    if outcome.kind == DecisionKind.RETRY:
        retry = deciding.retries_this_cycle + 1
        lane = deciding.model_copy(update={
            "retries_this_cycle": retry,
            "rank_in_flight": deciding.rank_in_flight + 1,
            "status": LaneStatus.AWAITING_PREDICTION,
        })
        actions.append(RecordDecision(
            pipeline_id=state.id, lane=lane.lane, cycle=lane.cycle, retry=retry - 1,
            outcome=outcome.kind, score=score, detail=outcome.next_sequence.id,
        ))
        task = build_prediction_task(
            outcome.next_sequence,
            state.spec,
            lane.lane,
            lane.cycle,
            retry=retry,
            parent_structure_id=lane.current_structure.id,
            profiles=params.profiles,
        )
        lane, action = _submit(task, lane, task_index)
        actions.append(action)
        return lane, actions

    if outcome.kind == DecisionKind.TERMINATE_LANE:
        lane, finish_actions = _terminate(state, deciding, outcome.reason)
        finish_actions[0] = finish_actions[0].model_copy(update={"score": score})
        return lane, actions + finish_actions

    accepted = deciding.model_copy(update={
        "last_accepted_metrics": outputs.metrics,
        "last_accepted_structure": outputs.structure,
        "baseline_metrics": deciding.baseline_metrics or outputs.metrics,
        "metric_history": deciding.metric_history + (outputs.metrics,),
    })
    actions.append(RecordDecision(
        pipeline_id=state.id, lane=lane.lane, cycle=lane.cycle, retry=lane.retries_this_cycle,
        outcome=outcome.kind, score=score, detail=outputs.structure.id,
    ))

    if outcome.kind == DecisionKind.COMPLETE_LANE:
        lane = accepted.model_copy(update={"status": LaneStatus.COMPLETED})
        actions.append(_finish(state, lane))
        return lane, actions

    lane = accepted.model_copy(update={
        "status": LaneStatus.ADVANCING,
        "cycle": accepted.cycle + 1,
        "current_structure": outcome.new_structure,
        "ranked_batch": (),
        "rank_in_flight": 0,
        "retries_this_cycle": 0,
    })
    task = build_generation_task(
        lane.current_structure, state.spec, lane.lane, lane.cycle, params.profiles
    )
    lane = lane.model_copy(update={"status": LaneStatus.GENERATING_SEQUENCES})
    lane, action = _submit(task, lane, task_index)
    actions.append(action)
    return lane, actions


def _on_task_completed(
    state: PipelineState, result: TaskResult
) -> Tuple[PipelineState, List[Action]]:
    if result.task_id not in state.task_index:
        raise UnknownTaskError(f"task {result.task_id} is not pending in pipeline {state.id}")
    lane = state.lanes[state.task_index[result.task_id]]
    if lane.status.absorbing:
        raise ProtocolStateError(f"lane {lane.lane} of {state.id} is already {lane.status.value}")
    if lane.pending_task != result.task_id:
        raise ProtocolStateError(f"lane {lane.lane} of {state.id} awaits {lane.pending_task}")

    task_index = dict(state.task_index)
    del task_index[result.task_id]

    if not result.succeeded:
        lane, actions = _terminate(
            state, lane, TerminationReason.TASK_FAILED, result.reason or "task failed"
        )
    elif lane.status == LaneStatus.GENERATING_SEQUENCES:
        lane, actions = _on_generation(state, lane, result, task_index)
    elif lane.status == LaneStatus.AWAITING_PREDICTION:
        lane, actions = _on_prediction(state, lane, result, task_index)
    else:
        raise ProtocolStateError(
            f"lane {lane.lane} of {state.id} cannot take a result while {lane.status.value}"
        )

    return _replace_lane(state, lane, task_index), actions


def advance(state: PipelineState, event: PipelineEvent) -> Tuple[PipelineState, List[Action]]:
    """
    Apply one event to a pipeline.

    Raises:
        ProtocolStateError: the event does not fit the pipeline's state
        UnknownTaskError: a completion for a task this pipeline is not awaiting
    """
    if isinstance(event, PipelineStarted):
        if event.pipeline_id != state.id:
            raise ProtocolStateError(f"start event for {event.pipeline_id} sent to {state.id}")
        return _on_start(state)
    if isinstance(event, TaskCompleted):
        if state.finished:
            raise ProtocolStateError(f"pipeline {state.id} is already finished")
        return _on_task_completed(state, event.result)
    raise ProtocolStateError(f"unsupported event {type(event).__name__}")
