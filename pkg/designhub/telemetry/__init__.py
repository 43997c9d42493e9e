"""Event capture and reporting: makespan, metric series, CSV/YAML exports."""

from .export import (
    cycles_to_csv,
    decisions_to_csv,
    dump_yaml,
    events_from_csv,
    events_to_csv,
    utilization_to_csv,
    write_text,
)
from .makespan import MakespanBreakdown, makespan, union_length
from .series import METRICS, CyclePoint, MetricSeries, metric_series
from .sink import DecisionRow, EventTrace

__all__ = [
    "cycles_to_csv",
    "decisions_to_csv",
    "dump_yaml",
    "events_from_csv",
    "events_to_csv",
    "utilization_to_csv",
    "write_text",
    "MakespanBreakdown",
    "makespan",
    "union_length",
    "METRICS",
    "CyclePoint",
    "MetricSeries",
    "metric_series",
    "DecisionRow",
    "EventTrace",
]
