"""Task directories: description, scaffold and evaluation settings."""

from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from ..case_bank.models import Modality
from ..utils.logger import get_logger
from .analysis import DEFAULT_METRIC_PATTERN, compile_metric_pattern
from .exceptions import TaskError
from .models import MetricDirection

logger = get_logger(__name__)

TASK_FILE = "task.md"
SCAFFOLD_FILE = "train.py"
SETTINGS_FILE = "task.yaml"


class TaskSettings(BaseModel):
    """Optional ``task.yaml`` overrides."""

    name: Optional[str] = None
    modality: Modality = Modality.OTHER
    metric_name: str = "metric"
    direction: MetricDirection = MetricDirection.LOWER_BETTER
    metric_pattern: str = DEFAULT_METRIC_PATTERN
    timeout: Optional[float] = Field(default=None, gt=0)
    evaluator: Optional[str] = Field(default=None, description="Scorer script run after each clean execution")
    evaluator_pattern: Optional[str] = None

    @field_validator("metric_pattern", "evaluator_pattern")
    @classmethod
    def one_group(cls, v: Optional[str]) -> Optional[str]:
        if v is not None:
            compile_metric_pattern(v)
        return v


class TaskSpec(BaseModel):
    """A loaded task: what to solve and the script to start from."""

    root: Path
    name: str
    description: str = Field(..., min_length=1)
    scaffold: str = Field(..., min_length=1)
    settings: TaskSettings = Field(default_factory=TaskSettings)

    @property
    def direction(self) -> MetricDirection:
        return self.settings.direction

    @property
    def metric_pattern(self) -> str:
        return self.settings.metric_pattern

    @property
    def modality(self) -> Modality:
        return self.settings.modality


def _read_settings(path: Path) -> Dict[str, Any]:
    if not path.exists():
        return {}
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise TaskError(f"Cannot parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise TaskError(f"{path} must contain a mapping")
    return data


def load_task(path: Path) -> TaskSpec:
    """
    Load ``task.md``, ``train.py`` and optional ``task.yaml`` from ``path``.

    Raises:
        TaskError: Missing files, empty description or invalid settings
    """
    root = Path(path)
    if not root.is_dir():
        raise TaskError(f"Task directory not found: {root}")
    for required in (TASK_FILE, SCAFFOLD_FILE):
        if not (root / required).is_file():
            raise TaskError(f"Task directory {root} has no {required}")

    try:
        settings = TaskSettings.model_validate(_read_settings(root / SETTINGS_FILE))
        task = TaskSpec(
            root=root,
            name=settings.name or root.name,
            description=(root / TASK_FILE).read_text(encoding="utf-8").strip(),
            scaffold=(root / SCAFFOLD_FILE).read_text(encoding="utf-8"),
            settings=settings,
        )
    except ValidationError as e:
        raise TaskError(f"Invalid task {root}: {e.errors()[0]['msg']}") from e
    if task.settings.evaluator and not (root / task.settings.evaluator).is_file():
        raise TaskError(f"Evaluator script not found: {task.settings.evaluator}")

    logger.debug("task_loaded", name=task.name, direction=task.direction.value)
    return task
