"""Executor package: sandboxed script runs and result analysis."""

from .analysis import (
    DEFAULT_METRIC_PATTERN,
    TRACEBACK_HEADER,
    classify_error,
    compile_metric_pattern,
    detect_error,
    extract_metric,
    is_improvement,
)
from .artifacts import RunLayout
from .evaluation import CommandEvaluator, Evaluator
from .exceptions import (
    ExecutorError,
    InterpreterNotFoundError,
    MetricPatternError,
    SpawnError,
    TaskError,
    WorkdirBusyError,
    WorkdirError,
)
from .models import ErrorKind, ExecutionResult, MetricDirection, SandboxPolicy
from .sandbox import SCRIPT_NAME, run_file, run_script
from .task import TaskSettings, TaskSpec, load_task

__all__ = [
    "run_script",
    "run_file",
    "SCRIPT_NAME",
    "detect_error",
    "extract_metric",
    "classify_error",
    "is_improvement",
    "compile_metric_pattern",
    "DEFAULT_METRIC_PATTERN",
    "TRACEBACK_HEADER",
    "ExecutionResult",
    "SandboxPolicy",
    "MetricDirection",
    "ErrorKind",
    "TaskSpec",
    "TaskSettings",
    "load_task",
    "RunLayout",
    "Evaluator",
    "CommandEvaluator",
    "ExecutorError",
    "InterpreterNotFoundError",
    "WorkdirError",
    "WorkdirBusyError",
    "SpawnError",
    "TaskError",
    "MetricPatternError",
]
