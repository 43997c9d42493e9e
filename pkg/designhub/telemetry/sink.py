"""
Append-only telemetry sink fed by the coordinator's event loop
"""

from typing import Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from ..scheduler.scheduler import ScheduledEvent


class DecisionRow(BaseModel):
    """One protocol decision or sub-pipeline spawn"""
    model_config = ConfigDict(frozen=True)

    time: float
    kind: str
    pipeline: str
    lane: int
    cycle: int
    detail: str = ""
    score: Optional[float] = None


class EventTrace:
    """Single writer; readers take snapshots"""

    def __init__(self):
        self._events: List[ScheduledEvent] = []
        self._decisions: List[DecisionRow] = []

    def extend(self, events: Iterable[ScheduledEvent]) -> None:
        self._events.extend(events)

    def record_decision(self, row: DecisionRow) -> None:
        self._decisions.append(row)

    @property
    def events(self) -> Tuple[ScheduledEvent, ...]:
        return tuple(self._events)

    @property
    def decisions(self) -> Tuple[DecisionRow, ...]:
        return tuple(self._decisions)

    def __len__(self) -> int:
        return len(self._events)
