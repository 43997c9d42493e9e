"""Tests for the resource pool and the pilot scheduler."""

from typing import List, Tuple

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from designhub.domain.models import CandidateSequence, ProteinStructure
from designhub.errors import ArgumentError, CapacityError, UnknownTaskError
from designhub.executors.base import (
    GenerationPayload,
    Provenance,
    ResourceClass,
    TaskKind,
    TaskPhase,
    TaskSpec,
)
from designhub.protocol.engine import build_prediction_task
from designhub.scheduler import Clock, ClockMode, EventKind, PilotScheduler, ResourcePool
from tests.conftest import make_spec


def make_task(task_id: str, phases: List[Tuple[int, int, float]]) -> TaskSpec:
    """A task from (cpu, gpu, duration) phases"""
    task_phases = [
        TaskPhase(
            resource_class=ResourceClass.GPU_BOUND if gpu else ResourceClass.CPU_BOUND,
            duration=duration,
            cpu_cores=cpu,
            gpus=gpu,
        )
        for cpu, gpu, duration in phases
    ]
    return TaskSpec(
        id=task_id,
        kind=TaskKind.SEQUENCE_GENERATION,
        cpu_cores=max(p.cpu_cores for p in task_phases),
        gpus=max(p.gpus for p in task_phases),
        phases=task_phases,
        payload=GenerationPayload(structure=ProteinStructure(id="s"), num_sequences=1),
        provenance=Provenance(pipeline_id="p", lane=0, cycle=1),
    )


def _sequence() -> CandidateSequence:
    return CandidateSequence(id="c1", residues="MKV", log_likelihood=-1, source_structure="s1")


def run_to_idle(scheduler: PilotScheduler, limit: int = 100_000) -> None:
    for _ in range(limit):
        if scheduler.idle:
            return
        scheduler.schedule_step()
    raise AssertionError("scheduler never went idle")


def kinds(scheduler: PilotScheduler, task_id: str) -> List[str]:
    return [e.kind.value for e in scheduler.events_for(task_id)]


# Pool


def test_pool_allocate_and_release():
    pool = ResourcePool(28, 4)
    pool.allocate("a", 4, 1)
    assert pool.busy() == (4, 1)
    assert pool.conserved()
    assert pool.release("a") == (4, 1)
    assert pool.busy() == (0, 0)
    assert pool.release("a") == (0, 0)


def test_pool_rejects():
    with pytest.raises(ArgumentError):
        ResourcePool(0, 1)
    pool = ResourcePool(2, 1)
    with pytest.raises(CapacityError):
        pool.allocate("a", 3, 0)
    pool.allocate("a", 1, 0)
    with pytest.raises(ArgumentError):
        pool.allocate("a", 1, 0)


# Scheduler


def test_submit_beyond_capacity_is_permanent():
    scheduler = PilotScheduler(ResourcePool(28, 4))
    with pytest.raises(CapacityError):
        scheduler.submit(make_task("wide", [(1, 5, 1.0)]))


def test_submit_duplicate():
    scheduler = PilotScheduler(ResourcePool(28, 4))
    scheduler.submit(make_task("a", [(1, 1, 1.0)]))
    with pytest.raises(ArgumentError):
        scheduler.submit(make_task("a", [(1, 1, 1.0)]))


def test_quiescent_step():
    scheduler = PilotScheduler(ResourcePool(28, 4))
    assert scheduler.schedule_step() == []
    assert scheduler.idle
    assert scheduler.clock.now == 0.0


def test_four_gpu_tasks_start_together():
    scheduler = PilotScheduler(ResourcePool(28, 4))
    for i in range(4):
        scheduler.submit(make_task(f"g{i}", [(1, 1, 10.0)]))
    events = scheduler.schedule_step()
    assert [e.kind for e in events] == [EventKind.TASK_STARTED] * 4
    assert scheduler.pool.busy() == (4, 4)


def test_task_waits_for_a_free_gpu():
    scheduler = PilotScheduler(ResourcePool(28, 1), exec_setup_seconds=0.0)
    scheduler.submit(make_task("first", [(0, 1, 5.0)]))
    scheduler.submit(make_task("second", [(0, 1, 5.0)]))
    run_to_idle(scheduler)
    started = {e.task_id: e.time for e in scheduler.events if e.kind == EventKind.TASK_STARTED}
    assert started == {"first": 0.0, "second": 5.0}


def test_first_fit_skips_blocked_wide_task():
    scheduler = PilotScheduler(ResourcePool(28, 4))
    scheduler.submit(make_task("blocker", [(0, 3, 50.0)]))
    scheduler.schedule_step()
    scheduler.submit(make_task("wide", [(0, 4, 1.0)]))
    scheduler.submit(make_task("narrow", [(0, 1, 1.0)]))
    events = scheduler.schedule_step()
    assert [(e.kind, e.task_id) for e in events] == [(EventKind.TASK_STARTED, "narrow")]
    assert [t.id for t in scheduler.pending] == ["wide"]


def test_prediction_phase_boundary_swaps_cpu_for_gpu():
    scheduler = PilotScheduler(ResourcePool(28, 4), exec_setup_seconds=1.0)
    task = build_prediction_task(_sequence(), make_spec(), parent_structure_id="s1")
    scheduler.submit(task)
    run_to_idle(scheduler)

    trace = [(e.time, e.kind, e.cpu_delta, e.gpu_delta) for e in scheduler.events_for(task.id)]
    assert trace == [
        (0.0, EventKind.TASK_QUEUED, 0, 0),
        (0.0, EventKind.TASK_STARTED, 4, 0),
        (1.0, EventKind.PHASE_CHANGED, 0, 0),
        (81.0, EventKind.PHASE_CHANGED, -4, 1),
        (101.0, EventKind.TASK_FINISHED, 0, -1),
    ]


def test_failed_boundary_reacquisition_requeues_with_priority():
    scheduler = PilotScheduler(ResourcePool(8, 1), exec_setup_seconds=0.0)
    scheduler.submit(make_task("gpu_hog", [(0, 1, 10.0)]))
    scheduler.submit(make_task("two_phase", [(4, 0, 2.0), (0, 1, 1.0)]))
    run_to_idle(scheduler)

    assert kinds(scheduler, "two_phase") == [
        "TaskQueued", "TaskStarted", "PhaseChanged", "AllocFailedRequeued", "PhaseChanged", "TaskFinished",
    ]
    requeued = [e for e in scheduler.events_for("two_phase") if e.kind == EventKind.ALLOC_FAILED_REQUEUED]
    assert (requeued[0].time, requeued[0].cpu_delta) == (2.0, -4)
    resumed = scheduler.events_for("two_phase")[-2]
    assert (resumed.time, resumed.gpu_delta) == (10.0, 1)


def test_boundary_queue_served_before_pending():
    scheduler = PilotScheduler(ResourcePool(8, 1), exec_setup_seconds=0.0)
    scheduler.submit(make_task("gpu_hog", [(0, 1, 10.0)]))
    scheduler.submit(make_task("two_phase", [(4, 0, 2.0), (0, 1, 1.0)]))
    scheduler.schedule_step()
    scheduler.submit(make_task("late_gpu", [(0, 1, 1.0)]))
    run_to_idle(scheduler)
    resumed = [e.time for e in scheduler.events_for("two_phase") if e.kind == EventKind.PHASE_CHANGED]
    late = [e.time for e in scheduler.events_for("late_gpu") if e.kind == EventKind.TASK_STARTED]
    assert resumed[-1] == 10.0
    assert late == [11.0]


def test_same_time_events_order_by_task_id():
    scheduler = PilotScheduler(ResourcePool(28, 4), exec_setup_seconds=0.0)
    for name in ("b", "a", "c"):
        scheduler.submit(make_task(name, [(1, 0, 3.0)]))
    run_to_idle(scheduler)
    finished = [e.task_id for e in scheduler.events if e.kind == EventKind.TASK_FINISHED]
    assert finished == ["a", "b", "c"]


def test_simulated_runs_are_deterministic():
    def trace():
        scheduler = PilotScheduler(ResourcePool(6, 2))
        rng = np.random.default_rng(1)
        for i in range(40):
            scheduler.submit(make_task(f"t{i:02d}", [
                (int(rng.integers(1, 5)), 0, float(rng.integers(1, 20))),
                (0, int(rng.integers(1, 3)), float(rng.integers(1, 5))),
            ]))
        run_to_idle(scheduler)
        return scheduler.events

    assert trace() == trace()


def test_wall_mode_holds_peak_until_complete():
    scheduler = PilotScheduler(ResourcePool(28, 4), Clock(ClockMode.WALL))
    task = build_prediction_task(_sequence(), make_spec())
    scheduler.submit(task)
    events = scheduler.schedule_step()
    assert [(e.kind, e.cpu_delta, e.gpu_delta) for e in events] == [
        (EventKind.TASK_STARTED, 4, 1),
        (EventKind.PHASE_CHANGED, 0, 0),
    ]
    assert scheduler.schedule_step() == []
    finished = scheduler.complete(task.id)
    assert (finished.cpu_delta, finished.gpu_delta) == (-4, -1)
    assert scheduler.idle
    with pytest.raises(UnknownTaskError):
        scheduler.complete(task.id)


def test_complete_is_wall_mode_only():
    scheduler = PilotScheduler(ResourcePool(28, 4))
    with pytest.raises(ArgumentError):
        scheduler.complete("anything")


# Conservation over randomized task sets


phase = st.tuples(st.integers(0, 8), st.integers(0, 4), st.floats(0.0, 50.0, allow_nan=False))
task_phases = st.lists(phase, min_size=1, max_size=3).filter(
    lambda ps: max(c for c, _, _ in ps) + max(g for _, g, _ in ps) >= 1
)


def check_conservation(scheduler: PilotScheduler) -> None:
    pool = scheduler.pool
    busy_cpu = busy_gpu = 0
    seen = len(scheduler.events)
    for _ in range(1_000_000):
        if scheduler.idle:
            break
        startable = any(pool.fits(t.phases[0].cpu_cores, t.phases[0].gpus) for t in scheduler.pending)
        before = scheduler.clock.now
        events = scheduler.schedule_step()
        if scheduler.clock.now > before:
            # the clock only moves once nothing queued can start
            assert not startable
        for e in events:
            busy_cpu += e.cpu_delta
            busy_gpu += e.gpu_delta
            assert 0 <= busy_cpu <= pool.cpu_cores_total
            assert 0 <= busy_gpu <= pool.gpus_total
        seen += len(events)
        assert pool.conserved()
        assert (busy_cpu, busy_gpu) == pool.busy()
    assert scheduler.idle
    assert (busy_cpu, busy_gpu) == (0, 0)
    assert seen == len(scheduler.events)


@settings(max_examples=30, deadline=None)
@given(st.lists(task_phases, min_size=1, max_size=60))
def test_conservation_property(tasks):
    scheduler = PilotScheduler(ResourcePool(8, 4), exec_setup_seconds=0.5)
    for i, phases in enumerate(tasks):
        scheduler.submit(make_task(f"t{i:03d}", phases))
    check_conservation(scheduler)
    finished = [e for e in scheduler.events if e.kind == EventKind.TASK_FINISHED]
    assert len(finished) == len(tasks)


def test_conservation_thousand_tasks():
    rng = np.random.default_rng(7)
    scheduler = PilotScheduler(ResourcePool(28, 4), exec_setup_seconds=1.0)
    for i in range(1000):
        phases = [(int(rng.integers(1, 9)), 0, float(rng.uniform(1, 80)))]
        if rng.random() < 0.7:
            phases.append((0, int(rng.integers(1, 3)), float(rng.uniform(1, 20))))
        scheduler.submit(make_task(f"t{i:04d}", phases))
    check_conservation(scheduler)
