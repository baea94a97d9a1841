"""Pipeline-level errors shared by development and deployment."""

from typing import Optional


class PipelineError(Exception):
    """Base exception for pipeline setup failures."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        self.message = message
        self.error_code = error_code
        super().__init__(message)


class PipelineConfigError(PipelineError):
    def __init__(self, message: str):
        super().__init__(message, error_code="PIPELINE_CONFIG")


class ScaffoldError(PipelineError):
    """Raised when the task scaffold fails its baseline run."""

    def __init__(self, message: str, exit_code: Optional[int] = None):
        self.exit_code = exit_code
        super().__init__(message, error_code="SCAFFOLD_FAILED")
