"""
Simulated and wall clocks
"""

import time
from enum import Enum

from ..errors import ArgumentError

# Event times are quantized so a 9-decimal trace round-trips exactly
TIME_QUANTUM_DIGITS = 9


def quantize(t: float) -> float:
    return round(t, TIME_QUANTUM_DIGITS)


class ClockMode(str, Enum):
    SIMULATED = "simulated"
    WALL = "wall"


class Clock:
    """Monotonic time source; simulated clocks only move when advanced"""

    def __init__(self, mode: ClockMode = ClockMode.SIMULATED, start: float = 0.0):
        self.mode = ClockMode(mode)
        self._now = quantize(start)
        self._origin = time.monotonic()

    @property
    def simulated(self) -> bool:
        return self.mode == ClockMode.SIMULATED

    @property
    def now(self) -> float:
        if self.simulated:
            return self._now
        self._now = max(self._now, quantize(time.monotonic() - self._origin))
        return self._now

    def advance_to(self, t: float) -> float:
        if not self.simulated:
            raise ArgumentError("only a simulated clock can be advanced")
        t = quantize(t)
        if t < self._now:
            raise ArgumentError(f"clock cannot move backwards: {t} < {self._now}")
        self._now = t
        return t

    def advance_by(self, seconds: float) -> float:
        return self.advance_to(self._now + seconds)
