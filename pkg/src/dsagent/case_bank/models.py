"""Case records stored in insight and agent banks."""

import math
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class CaseKind(str, Enum):
    """What a case body holds."""

    INSIGHT = "insight"
    SOLUTION = "solution"


class Modality(str, Enum):
    """Data modality of the task a case came from."""

    TEXT = "text"
    TIME_SERIES = "time_series"
    TABULAR = "tabular"
    OTHER = "other"


class Case(BaseModel):
    """A retrievable unit of experience.

    Insight cases carry prose (write-ups, code summaries). Solution cases
    pair a task description with the script that solved it.
    """

    id: str = Field(..., min_length=1)
    kind: CaseKind
    modality: Modality = Modality.OTHER
    task_desc: str = ""
    body: str = Field(..., min_length=1)
    embedding: List[float] = Field(..., min_length=1)
    source: str = ""
    scaffold: Optional[str] = Field(default=None, description="Starter script of a solution case")
    truncated: bool = Field(default=False, description="Body was cut to the configured character cap")

    @field_validator("embedding")
    @classmethod
    def finite_embedding(cls, v: List[float]) -> List[float]:
        if not all(math.isfinite(x) for x in v):
            raise ValueError("embedding contains non-finite entries")
        if not any(v):
            raise ValueError("embedding has zero norm")
        return v

    @model_validator(mode="after")
    def check_solution(self) -> "Case":
        if self.kind is CaseKind.SOLUTION:
            if not self.task_desc.strip():
                raise ValueError("solution cases require a task description")
            if any(line.lstrip().startswith("```") for line in self.body.splitlines()):
                raise ValueError("solution body must be bare code without fences")
        return self

    @property
    def dim(self) -> int:
        return len(self.embedding)

    def to_record(self) -> Dict[str, Any]:
        """Serialise with a stable key order; optional fields only when set."""
        record: Dict[str, Any] = {
            "id": self.id,
            "kind": self.kind.value,
            "modality": self.modality.value,
            "task_desc": self.task_desc,
            "body": self.body,
            "embedding": list(self.embedding),
            "source": self.source,
        }
        if self.scaffold is not None:
            record["scaffold"] = self.scaffold
        if self.truncated:
            record["truncated"] = True
        return record
