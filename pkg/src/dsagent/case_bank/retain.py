"""Archiving improved solutions into both banks."""

import hashlib
from typing import Any, Optional, Protocol, Sequence, Tuple

from ..utils.logger import get_logger
from .exceptions import CaseBankError
from .models import Case, CaseKind, Modality
from .store import CaseBank, commit_atomically, exclusive_lock

logger = get_logger(__name__)


class TextEmbedder(Protocol):
    async def embed(self, text: str, trace: Any = None) -> Any: ...


def make_case_id(prefix: str, position: int, *parts: str) -> str:
    """Deterministic id from insertion position and content digest."""
    digest = hashlib.sha256("\x00".join(parts).encode("utf-8")).hexdigest()[:8]
    return f"{prefix}-{position:05d}-{digest}"


def embedding_values(embedding: Any) -> Sequence[float]:
    return list(getattr(embedding, "values", embedding))


async def retain(
    insight_bank: CaseBank,
    agent_bank: CaseBank,
    task_desc: str,
    script: str,
    embedder: TextEmbedder,
    *,
    scaffold: Optional[str] = None,
    modality: Modality = Modality.OTHER,
    source: str = "agent",
    trace: Any = None,
) -> Tuple[str, str]:
    """
    Store ``(task_desc, script)`` as a solution case in both banks.

    The embedding is computed once over ``task_desc``. Both files are
    replaced together; on any failure neither bank changes.

    Returns:
        Ids of the new insight-bank and agent-bank cases
    """
    if not script.strip():
        raise CaseBankError("Cannot retain an empty script", error_code="EMPTY_SCRIPT")
    if insight_bank.path.resolve() == agent_bank.path.resolve():
        raise CaseBankError("Insight and agent banks must be distinct files", error_code="SAME_BANK")

    embedding = embedding_values(await embedder.embed(task_desc, trace=trace))

    with exclusive_lock(insight_bank.path, agent_bank.path):
        insight_bank.reload()
        agent_bank.reload()
        new_cases = []
        for bank, prefix in ((insight_bank, "sol"), (agent_bank, "agent")):
            case = Case(
                id=make_case_id(prefix, len(bank) + 1, task_desc, script),
                kind=CaseKind.SOLUTION,
                modality=modality,
                task_desc=task_desc,
                body=script,
                embedding=list(embedding),
                source=source,
                scaffold=scaffold,
            )
            bank.check_insertable(case)
            new_cases.append(case)

        commit_atomically(
            [
                (insight_bank.path, [*insight_bank.cases, new_cases[0]]),
                (agent_bank.path, [*agent_bank.cases, new_cases[1]]),
            ]
        )
        insight_bank.cases.append(new_cases[0])
        agent_bank.cases.append(new_cases[1])

    logger.info(
        "case_retained",
        insight_id=new_cases[0].id,
        agent_id=new_cases[1].id,
        insight_size=len(insight_bank),
        agent_size=len(agent_bank),
    )
    return new_cases[0].id, new_cases[1].id
