"""Execution data models."""

import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class MetricDirection(str, Enum):
    LOWER_BETTER = "lower_better"
    HIGHER_BETTER = "higher_better"


class ErrorKind(str, Enum):
    """Coarse failure category of a script run."""

    NONE = "none"
    TIMEOUT = "timeout"
    SHAPE_MISMATCH = "shape_mismatch"
    UNDEFINED_VARIABLE = "undefined_variable"
    INCORRECT_FUNCTION_CALL = "incorrect_function_call"
    MISSING_IMPORT = "missing_import"
    KEY_ERROR = "key_error"
    DTYPE_MISMATCH = "dtype_mismatch"
    INCOMPLETE_PROGRAM = "incomplete_program"
    OTHER = "other"


class SandboxPolicy(BaseModel):
    """Limits and environment for one script launch."""

    workdir: Path
    timeout: float = Field(default=3600.0, gt=0, description="Wall-clock seconds before the group is killed")
    interpreter: str = Field(default=sys.executable, min_length=1)
    max_output_bytes: int = Field(default=1_000_000, ge=1, description="Cap per captured stream")
    memory_mb: Optional[int] = Field(default=None, ge=1)
    max_processes: Optional[int] = Field(default=None, ge=1)
    env_passthrough: List[str] = Field(default_factory=list)
    extra_env: Dict[str, str] = Field(default_factory=dict)


class ExecutionResult(BaseModel):
    """Observed outcome of running a script."""

    exit_code: int
    stdout: str = ""
    stderr: str = ""
    duration: float = Field(default=0.0, ge=0)
    timed_out: bool = False
    metric: Optional[float] = None
    stdout_truncated: bool = False
    stderr_truncated: bool = False
    error_kind: ErrorKind = ErrorKind.NONE
    synthetic: bool = Field(default=False, description="No process was launched")

    @classmethod
    def failure(cls, message: str, error_kind: ErrorKind = ErrorKind.OTHER) -> "ExecutionResult":
        """Result standing in for a script that could not be produced."""
        return cls(exit_code=1, stderr=message, error_kind=error_kind, synthetic=True)

    def log_text(self, max_chars: Optional[int] = None) -> str:
        """Combined stdout/stderr as shown to the Debugger and Logger."""
        parts = []
        if self.stdout:
            parts.append(self.stdout.rstrip("\n"))
        if self.stderr:
            parts.append(self.stderr.rstrip("\n"))
        if self.timed_out:
            parts.append("Execution timed out and was terminated.")
        text = "\n".join(parts) or f"Process exited with code {self.exit_code} and no output."
        if max_chars is not None and len(text) > max_chars:
            text = "...\n" + text[-max_chars:]
        return text

    def trace_fields(self) -> Dict[str, Any]:
        """Deterministic subset for the run trace."""
        return {
            "exit_code": self.exit_code,
            "timed_out": self.timed_out,
            "metric": self.metric,
            "error_kind": self.error_kind.value,
            "stdout_truncated": self.stdout_truncated,
            "stderr_truncated": self.stderr_truncated,
        }
