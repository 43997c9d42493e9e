"""
The coordinator's two ordered message channels.

Pipeline submissions and task completions travel on separate asyncio queues.
Both draw sequence numbers from one shared counter so that, when the channels
are logged to append-only JSON-lines files, merging the two logs by sequence
number recovers the exact order in which the coordinator consumed them.
"""

import asyncio
import itertools
from pathlib import Path
from typing import Generic, Iterator, List, Optional, Type, TypeVar

import aiofiles
import structlog
from pydantic import BaseModel

from ..errors import ReplayMismatchError
from .models import PipelineSubmission, TaskCompletion

logger = structlog.get_logger()

M = TypeVar("M", bound=BaseModel)

PIPELINE_LOG = "pipeline_channel.jsonl"
COMPLETION_LOG = "completion_channel.jsonl"


class ChannelLog:
    """Append-only JSON-lines record file"""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        # a run owns its log; start empty
        self.path.write_text("", encoding="utf-8")

    async def append(self, message: BaseModel) -> None:
        async with aiofiles.open(self.path, "a", encoding="utf-8") as f:
            await f.write(message.model_dump_json() + "\n")

    @staticmethod
    def read(path: Path, model: Type[M]) -> List[M]:
        messages = []
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    messages.append(model.model_validate_json(line))
                except ValueError as e:
                    raise ReplayMismatchError(f"{path}:{lineno}: unreadable record: {e}") from e
        return messages


class Channel(Generic[M]):
    """Ordered in-process queue, optionally mirrored to a ChannelLog"""

    def __init__(self, name: str, counter: Iterator[int], log: Optional[ChannelLog] = None):
        self.name = name
        self._counter = counter
        self._queue: asyncio.Queue = asyncio.Queue()
        self.log = log

    def next_seq(self) -> int:
        return next(self._counter)

    async def put(self, message: M) -> None:
        self._queue.put_nowait(message)
        if self.log is not None:
            await self.log.append(message)

    def drain(self) -> List[M]:
        """Everything currently queued, in arrival order"""
        drained = []
        while True:
            try:
                drained.append(self._queue.get_nowait())
            except asyncio.QueueEmpty:
                return drained

    def empty(self) -> bool:
        return self._queue.empty()


def open_channels(log_dir: Optional[Path] = None):
    """(pipeline channel, completion channel) sharing one sequence counter"""
    counter = itertools.count(1)
    pipeline_log = completion_log = None
    if log_dir is not None:
        pipeline_log = ChannelLog(Path(log_dir) / PIPELINE_LOG)
        completion_log = ChannelLog(Path(log_dir) / COMPLETION_LOG)
    return (
        Channel[PipelineSubmission]("pipeline", counter, pipeline_log),
        Channel[TaskCompletion]("completion", counter, completion_log),
    )


def read_channel_logs(pipeline_log: Path, completion_log: Path) -> List[BaseModel]:
    """Both logs merged into consumption order"""
    messages: List[BaseModel] = [
        *ChannelLog.read(pipeline_log, PipelineSubmission),
        *ChannelLog.read(completion_log, TaskCompletion),
    ]
    messages.sort(key=lambda m: m.seq)
    seqs = [m.seq for m in messages]
    if len(set(seqs)) != len(seqs):
        raise ReplayMismatchError("duplicate sequence numbers across channel logs")
    logger.debug("channel_logs_read", messages=len(messages))
    return messages
