"""Development stage: the case-based reasoning experiment loop."""

from .controller import (
    CODE_REMINDER,
    DevelopmentPipeline,
    make_run_id,
    mechanical_summary,
    run_development,
    select_case,
)
from .exceptions import PipelineConfigError, PipelineError, ScaffoldError
from .models import DevConfig, DevRunReport, IterationRecord, PipelineMode

__all__ = [
    "run_development",
    "select_case",
    "DevelopmentPipeline",
    "DevConfig",
    "DevRunReport",
    "IterationRecord",
    "PipelineMode",
    "PipelineError",
    "PipelineConfigError",
    "ScaffoldError",
    "make_run_id",
    "mechanical_summary",
    "CODE_REMINDER",
]
