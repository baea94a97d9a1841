"""Cosine similarity and exhaustive top-k retrieval."""

from typing import Any, List, Sequence, Union

import numpy as np

from ..case_bank.models import Case, CaseKind
from ..case_bank.store import CaseBank
from ..utils.logger import get_logger
from .exceptions import DimensionMismatchError, EmptyBankError, WrongBankError, ZeroNormError
from .models import Embedding, ScoredCase

logger = get_logger(__name__)

Vector = Union[Embedding, Sequence[float]]


def _as_array(v: Vector) -> np.ndarray:
    values = v.values if isinstance(v, Embedding) else v
    return np.asarray(values, dtype=np.float64)


def cosine(u: Vector, v: Vector) -> float:
    """dot(u, v) / (|u| |v|), clamped to [-1, 1]."""
    a = _as_array(u)
    b = _as_array(v)
    if a.shape != b.shape:
        raise DimensionMismatchError(a.shape[0], b.shape[0])
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroNormError("Cosine is undefined for a zero-norm vector")
    score = float(np.dot(a, b)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, score))


def top_k(query: Vector, bank: CaseBank, k: int) -> List[ScoredCase]:
    """
    Rank every bank case against ``query``.

    Returns the ``min(k, len(bank))`` best cases, best first; equal scores
    keep bank insertion order.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(bank) == 0:
        raise EmptyBankError()

    scored = [
        ScoredCase(case_id=case.id, index=i, score=cosine(query, case.embedding))
        for i, case in enumerate(bank.cases)
    ]
    scored.sort(key=lambda s: -s.score)
    return scored[:k]


async def retrieve_best_pair(
    task_desc: str,
    agent_bank: CaseBank,
    embedder: Any,
    trace: Any = None,
) -> Case:
    """Solution case whose task description is closest to ``task_desc``."""
    if len(agent_bank) == 0:
        raise EmptyBankError()
    insight_ids = [c.id for c in agent_bank.cases if c.kind is not CaseKind.SOLUTION]
    if insight_ids:
        raise WrongBankError(f"Agent bank holds non-solution cases: {', '.join(insight_ids[:3])}")

    query = await embedder.embed(task_desc, trace=trace)
    best = top_k(query, agent_bank, 1)[0]
    logger.debug("best_pair", case_id=best.case_id, score=best.score)
    return agent_bank.cases[best.index]
