"""Token pricing and exact cost accounting."""

from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any, Iterable

from pydantic import BaseModel, ConfigDict, Field, field_validator

MONEY_QUANTUM = Decimal("0.000001")
ONE_MILLION = Decimal(1_000_000)


class PriceTable(BaseModel):
    """Per-1M-token prices in currency units."""

    model_config = ConfigDict(frozen=True)

    input_per_million: Decimal = Field(Decimal("0"), ge=0)
    output_per_million: Decimal = Field(Decimal("0"), ge=0)

    @field_validator("input_per_million", "output_per_million", mode="before")
    @classmethod
    def parse_price(cls, v: Any) -> Decimal:
        if isinstance(v, float):
            return Decimal(repr(v))
        return Decimal(v)

    def cost_of(self, prompt_tokens: int, completion_tokens: int) -> Decimal:
        raw = (
            Decimal(prompt_tokens) * self.input_per_million
            + Decimal(completion_tokens) * self.output_per_million
        ) / ONE_MILLION
        return raw.quantize(MONEY_QUANTUM, rounding=ROUND_HALF_EVEN)


def total_cost(exchanges: Iterable[Any]) -> Decimal:
    """Sum of per-exchange costs; exact, order independent."""
    total = Decimal("0").quantize(MONEY_QUANTUM)
    for exchange in exchanges:
        total += exchange.cost
    return total
