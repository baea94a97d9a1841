"""Development-stage configuration and reports."""

import sys
from datetime import datetime
from decimal import Decimal
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ..executor.analysis import detect_error
from ..executor.models import ExecutionResult, MetricDirection
from ..llm_gateway.models import LlmExchange
from ..prompt_kit.parsers import Plan, RankPermutation


class PipelineMode(str, Enum):
    """Ablation switch for the case-based reasoning components."""

    FULL = "full"
    NO_REVISERANK = "no_reviserank"
    NO_CBR = "no_cbr"


class DevConfig(BaseModel):
    """Development loop settings."""

    k: int = Field(default=5, ge=1, description="Cases retrieved before the loop")
    iterations: int = Field(default=5, ge=1, description="Loop iterations T")
    max_debug_attempts: int = Field(default=5, ge=0, description="Debugger rounds N per iteration")
    temperature: float = Field(default=0.5, ge=0.0, le=2.0)
    mode: PipelineMode = PipelineMode.FULL
    metric_direction: Optional[MetricDirection] = Field(default=None, description="Overrides the task setting")
    model: str = Field(default="gpt-4", min_length=1)
    max_tokens: Optional[int] = Field(default=None, ge=1)
    max_log_chars: int = Field(default=4000, ge=100, description="Execution log tail shown to prompts")
    timeout: Optional[float] = Field(default=None, gt=0, description="Sandbox timeout; task setting or 3600 s when unset")
    interpreter: str = Field(default=sys.executable, min_length=1)
    max_output_bytes: int = Field(default=1_000_000, ge=1)
    memory_mb: Optional[int] = Field(default=None, ge=1)
    max_processes: Optional[int] = Field(default=None, ge=1)
    run_id: Optional[str] = None


class IterationRecord(BaseModel):
    """Everything one loop iteration decided and observed."""

    step: int = Field(..., ge=1)
    permutation: Optional[RankPermutation] = None
    selected_case_id: Optional[str] = None
    plan: Optional[Plan] = None
    script: str = ""
    debug_attempts: int = Field(default=0, ge=0)
    result: ExecutionResult
    log_after: str = ""
    improved: bool = False
    retained: bool = False
    best_metric: Optional[float] = None
    retained_ids: List[str] = Field(default_factory=list)
    failure: Optional[str] = Field(default=None, description="Why no script could be produced")

    @property
    def has_error(self) -> bool:
        return detect_error(self.result)


class DevRunReport(BaseModel):
    """Outcome of one development run."""

    run_id: str
    task_id: str
    mode: PipelineMode
    records: List[IterationRecord] = Field(default_factory=list)
    baseline: Optional[ExecutionResult] = None
    best_metric: Optional[float] = None
    best_script: Optional[str] = None
    exchanges: List[LlmExchange] = Field(default_factory=list)
    total_cost: Decimal = Decimal("0")
    embedding_calls: int = 0
    aborted: bool = False
    abort_error: Optional[str] = None
    started_at: datetime
    finished_at: Optional[datetime] = None

    @property
    def success(self) -> bool:
        return any(not r.has_error for r in self.records)

    @property
    def retained_count(self) -> int:
        return sum(1 for r in self.records if r.retained)

    def exchange_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for exchange in self.exchanges:
            counts[exchange.role] = counts.get(exchange.role, 0) + 1
        return counts

    def to_json_dict(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        data["success"] = self.success
        data["retained_count"] = self.retained_count
        data["exchange_counts"] = self.exchange_counts()
        return data
