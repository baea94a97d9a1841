"""Turning write-ups and notebooks into insight cases."""

import re
from decimal import Decimal
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field

from ..case_bank.exceptions import CaseBankError
from ..case_bank.models import Case, CaseKind, Modality
from ..case_bank.retain import make_case_id
from ..case_bank.store import CaseBank
from ..llm_gateway.exceptions import GatewayError
from ..llm_gateway.gateway import LlmGateway
from ..llm_gateway.models import LlmParams
from ..prompt_kit.renderers import render_solution_extractor
from ..retrieval.embedders import Embedder
from ..retrieval.exceptions import RetrievalError
from ..utils.logger import get_logger

logger = get_logger(__name__)

REPORT_SUFFIXES = (".md", ".txt")
CODE_SUFFIXES = (".py",)
_BLANK_RUN = re.compile(r"\n{3,}")


class IngestedCase(BaseModel):
    case_id: str
    source: str
    truncated: bool = False
    cost: Decimal = Decimal("0")


class IngestReport(BaseModel):
    added: List[IngestedCase] = Field(default_factory=list)
    skipped: List[str] = Field(default_factory=list, description="source: reason")
    rejected: List[str] = Field(default_factory=list, description="source: reason")
    exchanges: int = 0
    total_cost: Decimal = Decimal("0")


def clean_report(text: str) -> str:
    """Whitespace cleanup only; wording is kept as written."""
    lines = [line.rstrip() for line in text.replace("\r\n", "\n").replace("\r", "\n").split("\n")]
    return _BLANK_RUN.sub("\n\n", "\n".join(lines)).strip()


async def ingest_directory(
    reports_dir: Path,
    bank: CaseBank,
    embedder: Embedder,
    gateway: Optional[LlmGateway],
    params: Optional[LlmParams],
    summarize: bool = False,
    modality: Modality = Modality.OTHER,
) -> IngestReport:
    """
    Add one insight case per report or (summarised) code file in ``reports_dir``.

    Files are processed in name order. A file that cannot be read, is
    blank or whose summary request fails is skipped; code without
    ``summarize`` is rejected.
    """
    report = IngestReport()
    files = sorted(p for p in Path(reports_dir).iterdir() if p.is_file())
    for path in files:
        suffix = path.suffix.lower()
        if suffix not in REPORT_SUFFIXES + CODE_SUFFIXES:
            continue
        if suffix in CODE_SUFFIXES and not summarize:
            report.rejected.append(f"{path.name}: code files need --summarize to become insight cases")
            logger.error("code_file_rejected", file=path.name)
            continue
        try:
            raw = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            report.skipped.append(f"{path.name}: unreadable ({e})")
            logger.warning("file_unreadable", file=path.name, error=str(e))
            continue

        cost = Decimal("0")
        if suffix in CODE_SUFFIXES:
            if not raw.strip():
                report.skipped.append(f"{path.name}: empty")
                logger.warning("file_empty", file=path.name)
                continue
            try:
                exchange = await gateway.complete(
                    render_solution_extractor(raw), params, role="solution_extractor"
                )
            except GatewayError as e:
                report.skipped.append(f"{path.name}: summarization failed ({e.message})")
                logger.warning("summarization_failed", file=path.name, error=e.message)
                continue
            report.exchanges += 1
            cost = exchange.cost
            text = exchange.response.strip()
        else:
            text = clean_report(raw)

        if not text:
            report.skipped.append(f"{path.name}: empty")
            logger.warning("file_empty", file=path.name)
            continue

        try:
            embedding = await embedder.embed(text)
            case = Case(
                id=make_case_id("ins", len(bank) + 1, path.name, text),
                kind=CaseKind.INSIGHT,
                modality=modality,
                body=text,
                embedding=list(embedding.values),
                source=path.name,
                truncated=embedding.truncated,
            )
            bank.add_case(case)
        except (RetrievalError, CaseBankError) as e:
            report.skipped.append(f"{path.name}: {e}")
            logger.warning("ingest_failed", file=path.name, error=str(e))
            continue

        report.added.append(IngestedCase(case_id=case.id, source=path.name, truncated=case.truncated, cost=cost))
        report.total_cost += cost
        logger.info("case_ingested", case_id=case.id, source=path.name, truncated=case.truncated)
    return report
