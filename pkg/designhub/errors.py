"""
Exception hierarchy for designhub.

Task-level failures never surface as exceptions: executors convert them into
FAILED task results. Everything here signals a caller or configuration problem.
"""

from typing import Any, Optional


class DesignHubError(Exception):
    """Base class for all designhub errors"""


class ArgumentError(DesignHubError, ValueError):
    """An argument violates an operation's precondition"""


class MetricDomainError(DesignHubError, ValueError):
    """A quality metric lies outside its valid range"""

    def __init__(self, field: str, value: float, bounds: tuple[float, float]):
        self.field = field
        self.value = value
        self.bounds = bounds
        super().__init__(
            f"{field}={value!r} outside [{bounds[0]}, {bounds[1]}]"
        )


class FastaParseError(DesignHubError, ValueError):
    """Malformed FASTA document"""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ProtocolStateError(DesignHubError, RuntimeError):
    """An event or call does not fit the current pipeline/lane state"""


class UnknownTaskError(DesignHubError, KeyError):
    """A task id is not owned by any live pipeline"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown task"


class CapacityError(DesignHubError, ValueError):
    """A task can never fit the resource pool (permanent rejection)"""


class IncompleteRunError(DesignHubError, ValueError):
    """Telemetry asked for a completed run but the trace is partial"""


class DeadlockError(DesignHubError, RuntimeError):
    """No task is running, none can start, and pipelines are still live"""

    def __init__(self, message: str, dump: Optional[dict[str, Any]] = None):
        self.dump = dump or {}
        super().__init__(message)


class ConfigError(DesignHubError, ValueError):
    """A run configuration failed to load or validate"""

    def __init__(self, message: str, diagnostics: Optional[list[str]] = None):
        self.diagnostics = diagnostics or []
        super().__init__(message)


class ReplayMismatchError(DesignHubError, RuntimeError):
    """A channel log does not replay onto the coordinator state"""


class ReportSchemaError(DesignHubError, ValueError):
    """A report document does not match the RunReport schema"""
