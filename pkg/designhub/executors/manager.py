"""
Executor manager for routing tasks to the configured executors
"""

from typing import Dict, Literal, Optional

import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .base import ExecutorBase, TaskKind, TaskResult, TaskSpec
from .subprocess import SubprocessExecutor, SubprocessParams
from .synthetic import SyntheticExecutor, SyntheticParams

logger = structlog.get_logger()

ExecutorName = Literal["synthetic", "subprocess"]


class ExecutorConfig(BaseModel):
    """Executor selection; `routes` may send one task kind elsewhere"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExecutorName = "synthetic"
    synthetic: SyntheticParams = Field(default_factory=SyntheticParams)
    subprocess: Optional[SubprocessParams] = None
    routes: Dict[TaskKind, ExecutorName] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _subprocess_configured(self) -> "ExecutorConfig":
        used = {self.kind, *self.routes.values()}
        if "subprocess" in used and self.subprocess is None:
            raise ValueError("the subprocess executor needs a 'subprocess' section")
        return self

    @property
    def uses_synthetic(self) -> bool:
        return self.kind == "synthetic" or "synthetic" in self.routes.values()


class ExecutorManager(ExecutorBase):
    """Holds the configured executors and routes each task by kind"""

    name = "manager"

    def __init__(self, config: ExecutorConfig, root_seed: int = 0):
        super().__init__()
        self.config = config
        self.executors: Dict[str, ExecutorBase] = {}

        used = {config.kind, *config.routes.values()}
        if "synthetic" in used:
            self.executors["synthetic"] = SyntheticExecutor(config.synthetic, root_seed=root_seed)
        if "subprocess" in used:
            self.executors["subprocess"] = SubprocessExecutor(config.subprocess)

        logger.info(
            "executor_manager_initialized",
            executors=list(self.executors.keys()),
            default=config.kind,
        )

    def route_task(self, task: TaskSpec) -> str:
        """Determine which executor runs a given task"""
        return self.config.routes.get(task.kind, self.config.kind)

    async def _run(self, task: TaskSpec) -> TaskResult:
        executor_name = self.route_task(task)
        logger.debug("routing_task", task_id=task.id, executor=executor_name)
        return await self.executors[executor_name].execute(task)

    async def close(self) -> None:
        for executor in self.executors.values():
            await executor.close()


def build_executor(config: ExecutorConfig, root_seed: int = 0) -> ExecutorBase:
    """A single executor when no routes are set, otherwise a routing manager"""
    if config.routes:
        return ExecutorManager(config, root_seed=root_seed)
    if config.kind == "subprocess":
        return SubprocessExecutor(config.subprocess)
    return SyntheticExecutor(config.synthetic, root_seed=root_seed)
