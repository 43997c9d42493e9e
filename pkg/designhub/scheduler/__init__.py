"""Pilot-style heterogeneous slot scheduler on a discrete-event or wall clock."""

from .clock import Clock, ClockMode, quantize
from .pool import ResourcePool
from .scheduler import EventKind, PilotScheduler, ScheduledEvent
from .utilization import TimelinePoint, Utilization, utilization

__all__ = [
    "Clock",
    "ClockMode",
    "quantize",
    "ResourcePool",
    "EventKind",
    "PilotScheduler",
    "ScheduledEvent",
    "TimelinePoint",
    "Utilization",
    "utilization",
]
