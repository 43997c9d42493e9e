"""Tests for utilization integrated from an event trace."""

import pytest

from designhub.errors import ArgumentError
from designhub.scheduler import EventKind, ResourcePool, ScheduledEvent, utilization


def ev(time, kind, task_id, cpu=0, gpu=0) -> ScheduledEvent:
    return ScheduledEvent(time=time, kind=kind, task_id=task_id, cpu_delta=cpu, gpu_delta=gpu)


def test_one_gpu_of_four_for_the_whole_horizon():
    events = [
        ev(0.0, EventKind.TASK_STARTED, "a", gpu=1),
        ev(10.0, EventKind.TASK_FINISHED, "a", gpu=-1),
    ]
    util = utilization(events, ResourcePool(28, 4), (0.0, 10.0))
    assert util.gpu_pct == pytest.approx(25.0)
    assert util.cpu_pct == 0.0


def test_idle_pool():
    util = utilization([], ResourcePool(28, 4), (0.0, 5.0))
    assert (util.cpu_pct, util.gpu_pct) == (0.0, 0.0)
    assert util.timeline == [(0.0, 0, 0)]


def test_partial_occupancy_and_timeline():
    events = [
        ev(2.0, EventKind.TASK_STARTED, "a", cpu=4),
        ev(6.0, EventKind.PHASE_CHANGED, "a", cpu=-4, gpu=1),
        ev(8.0, EventKind.TASK_FINISHED, "a", gpu=-1),
    ]
    util = utilization(events, ResourcePool(8, 2), (0.0, 10.0))
    assert util.cpu_pct == pytest.approx(100.0 * 16 / 80)
    assert util.gpu_pct == pytest.approx(100.0 * 2 / 20)
    assert [tuple(p) for p in util.timeline] == [
        (0.0, 0, 0), (2.0, 4, 0), (6.0, 0, 1), (8.0, 0, 0),
    ]


def test_no_gpus_reports_zero_gpu():
    events = [ev(0.0, EventKind.TASK_STARTED, "a", cpu=1), ev(1.0, EventKind.TASK_FINISHED, "a", cpu=-1)]
    util = utilization(events, ResourcePool(2, 0), (0.0, 1.0))
    assert util.cpu_pct == pytest.approx(50.0)
    assert util.gpu_pct == 0.0


@pytest.mark.parametrize("horizon", [(5.0, 5.0), (5.0, 1.0)])
def test_empty_horizon(horizon):
    with pytest.raises(ArgumentError):
        utilization([], ResourcePool(1, 0), horizon)
