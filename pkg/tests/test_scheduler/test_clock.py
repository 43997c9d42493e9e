"""Tests for the simulated and wall clocks."""

import pytest

from designhub.errors import ArgumentError
from designhub.scheduler import Clock, ClockMode, quantize


def test_simulated_clock_moves_only_forward():
    clock = Clock()
    assert clock.simulated and clock.now == 0.0
    assert clock.advance_to(5.0) == 5.0
    assert clock.advance_by(0.25) == 5.25
    with pytest.raises(ArgumentError):
        clock.advance_to(1.0)


def test_times_are_quantized():
    assert quantize(0.1 + 0.2) == 0.3
    assert Clock(start=1.0000000001).now == 1.0


def test_wall_clock_is_monotonic_and_not_advanceable():
    clock = Clock(ClockMode.WALL)
    first = clock.now
    assert clock.now >= first
    with pytest.raises(ArgumentError):
        clock.advance_to(10.0)
