"""Deployment-stage configuration and reports."""

import sys
from datetime import datetime
from decimal import Decimal
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from ..executor.models import ExecutionResult
from ..llm_gateway.models import LlmExchange


class DeploySelection(str, Enum):
    """How example cases reach the Adapter prompt."""

    RETRIEVED = "retrieved"
    RANDOM = "random"
    NONE = "none"


class DeployConfig(BaseModel):
    n_examples: int = Field(default=1, ge=0)
    selection: DeploySelection = DeploySelection.RETRIEVED
    temperature: float = Field(default=0.7, ge=0.0, le=2.0)
    rng_seed: Optional[int] = None
    model: str = Field(default="gpt-4", min_length=1)
    max_tokens: Optional[int] = Field(default=None, ge=1)
    allow_mixed_bank: bool = Field(default=False, description="Skip non-solution cases instead of failing")
    timeout: Optional[float] = Field(default=None, gt=0)
    interpreter: str = Field(default=sys.executable, min_length=1)
    max_output_bytes: int = Field(default=1_000_000, ge=1)
    memory_mb: Optional[int] = Field(default=None, ge=1)
    max_processes: Optional[int] = Field(default=None, ge=1)
    run_id: Optional[str] = None

    @model_validator(mode="after")
    def examples_for_selection(self) -> "DeployConfig":
        if self.selection is DeploySelection.NONE:
            self.n_examples = 0
        elif self.n_examples < 1:
            raise ValueError(f"selection={self.selection.value} needs n_examples >= 1")
        return self


class DeployReport(BaseModel):
    run_id: str
    task_id: str
    selection: DeploySelection
    selected_case_ids: List[str] = Field(default_factory=list)
    script: str = ""
    result: ExecutionResult
    one_pass: bool = False
    exchanges: List[LlmExchange] = Field(default_factory=list)
    total_cost: Decimal = Decimal("0")
    embedding_calls: int = 0
    aborted: bool = False
    abort_error: Optional[str] = None
    started_at: datetime
    finished_at: Optional[datetime] = None

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


class DeployTaskSummary(BaseModel):
    task_id: str
    run_id: Optional[str] = None
    one_pass: bool = False
    metric: Optional[float] = None
    cost: Decimal = Decimal("0")
    embedding_calls: int = 0
    selected_case_ids: List[str] = Field(default_factory=list)
    error_kind: Optional[str] = None
    error: Optional[str] = None


class DeploySummary(BaseModel):
    tasks: List[DeployTaskSummary] = Field(default_factory=list)
    one_pass_rate: float = 0.0
    total_cost: Decimal = Decimal("0")
    error_kind_counts: Dict[str, int] = Field(default_factory=dict)
