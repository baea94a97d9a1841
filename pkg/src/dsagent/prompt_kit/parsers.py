"""Parsers for the structured parts of LLM replies."""

import re
from typing import List, Optional, Sequence

from pydantic import BaseModel, Field, model_validator

from .exceptions import CodeExtractionError, DecisionParseError

_BRACKET_ID = re.compile(r"\[(\d+)\]")
_DIGITS = re.compile(r"\d+")
_DECISION = re.compile(r"\[Decision\]\s*:?")
_FENCE = re.compile(r"^\s*(`{3,})\s*([A-Za-z0-9_+.-]*)\s*$")
PYTHON_TAGS = frozenset({"python", "python3", "py"})
_MAX_ID_DIGITS = 6


class RankPermutation(BaseModel):
    """1-based ordering of the k cases shown to the reviser."""

    order: List[int] = Field(..., min_length=1)

    @model_validator(mode="after")
    def check_permutation(self) -> "RankPermutation":
        if sorted(self.order) != list(range(1, len(self.order) + 1)):
            raise ValueError(f"not a permutation of 1..{len(self.order)}: {self.order}")
        return self

    @property
    def k(self) -> int:
        return len(self.order)

    def apply(self, items: Sequence) -> list:
        """Reorder ``items`` (given in similarity order) by this permutation."""
        return [items[i - 1] for i in self.order]


class Plan(BaseModel):
    decision: str = Field(..., min_length=1)
    full_response: str
    degraded: bool = Field(default=False, description="No [Decision] marker; whole reply used")


def parse_permutation(reply: str, k: int) -> RankPermutation:
    """
    Read a ``[2] > [1] > [3]`` style ranking.

    Bracketed ids are preferred; bare numbers are used only when none
    appear. Ids outside 1..k and repeats are dropped, missing ids are
    appended in ascending order, so any input yields a permutation.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    tokens = _BRACKET_ID.findall(reply) or _DIGITS.findall(reply)
    order: List[int] = []
    for token in tokens:
        if len(token) > _MAX_ID_DIGITS:
            continue
        ident = int(token)
        if 1 <= ident <= k and ident not in order:
            order.append(ident)
    order.extend(i for i in range(1, k + 1) if i not in order)
    return RankPermutation(order=order)


def format_permutation(order: Sequence[int]) -> str:
    return " > ".join(f"[{i}]" for i in order)


def parse_decision(reply: str) -> Plan:
    """Text after the last ``[Decision]:`` marker, trimmed."""
    matches = list(_DECISION.finditer(reply))
    if not matches:
        raise DecisionParseError()
    decision = reply[matches[-1].end() :].strip()
    if not decision:
        raise DecisionParseError("The [Decision] section is empty")
    return Plan(decision=decision, full_response=reply)


def plan_from_reply(reply: str) -> Plan:
    """``parse_decision`` with the whole-reply fallback."""
    try:
        return parse_decision(reply)
    except DecisionParseError:
        if not reply.strip():
            raise
        return Plan(decision=reply.strip(), full_response=reply, degraded=True)


def _python_blocks(reply: str) -> List[str]:
    blocks: List[str] = []
    current: Optional[List[str]] = None
    fence_len = 0
    for line in reply.splitlines():
        match = _FENCE.match(line)
        if current is None:
            if match and match.group(2).lower() in PYTHON_TAGS:
                current, fence_len = [], len(match.group(1))
            continue
        if not match or len(match.group(1)) < fence_len:
            current.append(line)
        elif not match.group(2):
            blocks.append("\n".join(current))
            current = None
        else:
            # an opener inside an unclosed block restarts the search there
            current = [] if match.group(2).lower() in PYTHON_TAGS else None
            fence_len = len(match.group(1))
    if current is not None:
        blocks.append("\n".join(current))
    return blocks


def extract_code(reply: str) -> str:
    """
    Contents of the last python-tagged fenced block.

    Raises:
        CodeExtractionError: No non-empty python block in the reply
    """
    for block in reversed(_python_blocks(reply)):
        code = block.strip()
        if code:
            return code
    raise CodeExtractionError()
