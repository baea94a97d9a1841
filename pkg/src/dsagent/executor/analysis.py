"""Reading execution results: errors, metrics and failure categories."""

import re
from typing import Optional, Pattern, Union

from .exceptions import MetricPatternError
from .models import ErrorKind, ExecutionResult, MetricDirection

TRACEBACK_HEADER = "Traceback (most recent call last):"
DEFAULT_METRIC_PATTERN = r"final .* on validation set:\s*([0-9.eE+-]+)"

_EXCEPTION_LINE = re.compile(
    r"^(?:[\w.]+\.)?(?P<name>\w+(?:Error|Exception|Interrupt)|SystemExit|StopIteration)\b:?\s*(?P<detail>.*)$"
)
_SHAPE_HINTS = ("shape", "size mismatch", "dimension", "dimensions", "broadcast", "must match the size")
_DTYPE_HINTS = ("dtype", "could not convert", "expected scalar type", "cannot cast", "not supported between instances")


def compile_metric_pattern(pattern: Union[str, Pattern[str]]) -> Pattern[str]:
    """Compile ``pattern`` and require exactly one capture group."""
    try:
        compiled = re.compile(pattern) if isinstance(pattern, str) else pattern
    except re.error as e:
        raise MetricPatternError(str(pattern), str(e)) from e
    if compiled.groups != 1:
        raise MetricPatternError(compiled.pattern, f"expected 1 capture group, found {compiled.groups}")
    return compiled


def detect_error(result: ExecutionResult) -> bool:
    if result.exit_code != 0 or result.timed_out:
        return True
    return any(line.strip() == TRACEBACK_HEADER for line in result.stderr.splitlines())


def _to_float(raw: str) -> Optional[float]:
    for candidate in (raw, raw.rstrip(".eE+-")):
        try:
            return float(candidate)
        except ValueError:
            continue
    return None


def extract_metric(stdout: str, pattern: Union[str, Pattern[str]] = DEFAULT_METRIC_PATTERN) -> Optional[float]:
    """Number captured by the last match of ``pattern`` in ``stdout``."""
    compiled = compile_metric_pattern(pattern)
    last = None
    for last in compiled.finditer(stdout):
        pass
    if last is None:
        return None
    return _to_float(last.group(1))


def is_improvement(new: Optional[float], best: Optional[float], direction: MetricDirection) -> bool:
    """Strict improvement; the first metric always counts."""
    if new is None:
        return False
    if best is None:
        return True
    if direction is MetricDirection.LOWER_BETTER:
        return new < best
    return new > best


def classify_error(result: ExecutionResult) -> ErrorKind:
    if result.timed_out:
        return ErrorKind.TIMEOUT
    if not detect_error(result):
        return ErrorKind.NONE

    match = None
    for line in reversed(result.stderr.splitlines()):
        match = _EXCEPTION_LINE.match(line.strip())
        if match:
            break
    if match is None:
        return ErrorKind.OTHER

    name = match.group("name")
    detail = match.group("detail").lower()
    if name in ("SyntaxError", "IndentationError", "TabError") or (
        name == "EOFError" and "eof" in detail
    ):
        return ErrorKind.INCOMPLETE_PROGRAM
    if name in ("NameError", "UnboundLocalError"):
        return ErrorKind.UNDEFINED_VARIABLE
    if name in ("ModuleNotFoundError", "ImportError"):
        return ErrorKind.MISSING_IMPORT
    if name == "KeyError":
        return ErrorKind.KEY_ERROR
    if any(hint in detail for hint in _DTYPE_HINTS):
        return ErrorKind.DTYPE_MISMATCH
    if any(hint in detail for hint in _SHAPE_HINTS):
        return ErrorKind.SHAPE_MISMATCH
    if name in ("TypeError", "AttributeError"):
        return ErrorKind.INCORRECT_FUNCTION_CALL
    return ErrorKind.OTHER
