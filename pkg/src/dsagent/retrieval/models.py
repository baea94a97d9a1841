"""Retrieval value types."""

import math
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .exceptions import ZeroNormError


class Embedding(BaseModel):
    """Fixed-length vector produced by an embedding provider."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...] = Field(..., min_length=1)
    truncated: bool = False

    @field_validator("values")
    @classmethod
    def check_values(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not all(math.isfinite(x) for x in v):
            raise ValueError("Embedding contains non-finite entries")
        if not any(x != 0.0 for x in v):
            raise ZeroNormError()
        return v

    @property
    def dim(self) -> int:
        return len(self.values)


class ScoredCase(BaseModel):
    """A bank case with its cosine similarity to a query."""

    model_config = ConfigDict(frozen=True)

    case_id: str
    index: int = Field(..., ge=0, description="Insertion position in the bank")
    score: float = Field(..., ge=-1.0 - 1e-9, le=1.0 + 1e-9)
