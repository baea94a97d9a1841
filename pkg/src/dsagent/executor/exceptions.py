"""Executor errors; a failing script is a result, not an exception."""

from pathlib import Path
from typing import Optional


class ExecutorError(Exception):
    """Base exception for sandbox and task setup failures."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        self.message = message
        self.error_code = error_code
        super().__init__(message)


class InterpreterNotFoundError(ExecutorError):
    def __init__(self, interpreter: str):
        self.interpreter = interpreter
        super().__init__(f"Interpreter not found: {interpreter}", error_code="INTERPRETER_MISSING")


class WorkdirError(ExecutorError):
    def __init__(self, workdir: Path, detail: str = "does not exist"):
        self.workdir = workdir
        super().__init__(f"Workdir {workdir} {detail}", error_code="WORKDIR")


class WorkdirBusyError(WorkdirError):
    def __init__(self, workdir: Path):
        super().__init__(workdir, "is locked by another run")
        self.error_code = "WORKDIR_BUSY"


class SpawnError(ExecutorError):
    def __init__(self, message: str, original_error: Optional[Exception] = None):
        self.original_error = original_error
        super().__init__(message, error_code="SPAWN_FAILED")


class TaskError(ExecutorError):
    """Raised for an unusable task directory."""

    def __init__(self, message: str):
        super().__init__(message, error_code="TASK_INVALID")


class MetricPatternError(TaskError):
    def __init__(self, pattern: str, detail: str):
        self.pattern = pattern
        super().__init__(f"Invalid metric pattern {pattern!r}: {detail}")
        self.error_code = "METRIC_PATTERN"
