"""
Plot-ready CSV and YAML exports of run telemetry
"""

import csv
import io
from pathlib import Path
from typing import Any, List, Sequence

import yaml

from ..errors import ArgumentError
from ..scheduler.clock import quantize
from ..scheduler.scheduler import EventKind, ScheduledEvent
from ..scheduler.utilization import TimelinePoint
from .series import METRICS, MetricSeries
from .sink import DecisionRow

TRACE_HEADER = ["time", "kind", "task_id", "cpu_delta", "gpu_delta"]


def _fmt_time(t: float) -> str:
    return f"{t:.9f}"


def _to_csv(header: List[str], rows: List[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def events_to_csv(events: Sequence[ScheduledEvent]) -> str:
    return _to_csv(TRACE_HEADER, [
        [_fmt_time(e.time), e.kind.value, e.task_id, e.cpu_delta, e.gpu_delta]
        for e in events
    ])


def events_from_csv(text: str) -> List[ScheduledEvent]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != TRACE_HEADER:
        raise ArgumentError(f"not an event trace; header is {header}")
    return [
        ScheduledEvent(
            time=quantize(float(row[0])),
            kind=EventKind(row[1]),
            task_id=row[2],
            cpu_delta=int(row[3]),
            gpu_delta=int(row[4]),
        )
        for row in reader
        if row
    ]


def cycles_to_csv(series: MetricSeries) -> str:
    header = ["cycle", "count"]
    for m in METRICS:
        header += [f"{m}_median", f"{m}_half_std"]
    rows = []
    for p in series.points:
        row: List[Any] = [p.cycle, p.count]
        for m in METRICS:
            row += [repr(p.medians[m]), repr(p.half_stds[m])]
        rows.append(row)
    return _to_csv(header, rows)


def utilization_to_csv(timeline: Sequence[TimelinePoint]) -> str:
    return _to_csv(
        ["time", "busy_cpu", "busy_gpu"],
        [[_fmt_time(p.time), p.busy_cpu, p.busy_gpu] for p in timeline],
    )


def decisions_to_csv(rows: Sequence[DecisionRow]) -> str:
    return _to_csv(
        ["time", "kind", "pipeline", "lane", "cycle", "score", "detail"],
        [
            [_fmt_time(r.time), r.kind, r.pipeline, r.lane, r.cycle,
             "" if r.score is None else repr(r.score), r.detail]
            for r in rows
        ],
    )


def dump_yaml(document: Any) -> str:
    """Stable field order, block style"""
    return yaml.safe_dump(document, sort_keys=False, default_flow_style=False, allow_unicode=True)


def write_text(path: Path, content: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    return path
