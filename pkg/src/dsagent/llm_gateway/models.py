"""Pydantic models for chat requests, replies and metered exchanges."""

import hashlib
import json
from datetime import datetime, timezone
from decimal import Decimal
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class LlmParams(BaseModel):
    """Decoding parameters for one completion."""

    model_config = ConfigDict(frozen=True)

    model: str = Field(..., min_length=1)
    temperature: float = Field(0.5, ge=0.0, le=2.0)
    max_tokens: Optional[int] = Field(None, ge=1)

    def fingerprint(self, prompt: str) -> str:
        """Content hash identifying a request in a cassette.

        max_tokens is left out so recorded cassettes survive budget changes.
        """
        payload = json.dumps(
            [self.model, repr(float(self.temperature)), prompt],
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ProviderReply(BaseModel):
    """Raw answer of a chat provider before metering."""

    text: str
    prompt_tokens: int = Field(0, ge=0)
    completion_tokens: int = Field(0, ge=0)
    retries: int = Field(0, ge=0)
    truncated: bool = False


class LlmExchange(BaseModel):
    """One prompt/response pair with usage and cost."""

    role: str
    prompt: str
    params: LlmParams
    response: str
    prompt_tokens: int = Field(0, ge=0)
    completion_tokens: int = Field(0, ge=0)
    cost: Decimal = Decimal("0")
    retries: int = 0
    truncated: bool = False
    fingerprint: str
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    @field_validator("cost", mode="before")
    @classmethod
    def parse_cost(cls, v: Any) -> Decimal:
        """Money is always an exact decimal."""
        if isinstance(v, float):
            return Decimal(repr(v))
        return Decimal(v)

    def trace_fields(self) -> Dict[str, Any]:
        """Deterministic subset written to the run trace."""
        return {
            "role": self.role,
            "fingerprint": self.fingerprint,
            "model": self.params.model,
            "temperature": self.params.temperature,
            "prompt": self.prompt,
            "response": self.response,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "cost": str(self.cost),
            "retries": self.retries,
            "truncated": self.truncated,
        }
