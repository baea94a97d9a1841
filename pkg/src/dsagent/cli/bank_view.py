"""Tabular views of a case bank."""

import pandas as pd

from ..case_bank.exceptions import CaseBankError
from ..case_bank.store import CaseBank

LIST_COLUMNS = ["id", "kind", "modality", "source", "chars"]


class CaseNotFoundError(CaseBankError):
    def __init__(self, case_id: str):
        self.case_id = case_id
        super().__init__(f"No case with id {case_id}", error_code="CASE_NOT_FOUND")


def bank_frame(bank: CaseBank) -> pd.DataFrame:
    rows = [
        {
            "id": c.id,
            "kind": c.kind.value,
            "modality": c.modality.value,
            "source": c.source,
            "chars": len(c.body),
        }
        for c in bank.cases
    ]
    return pd.DataFrame(rows, columns=LIST_COLUMNS)


def render_list(bank: CaseBank) -> str:
    frame = bank_frame(bank)
    if frame.empty:
        return "  ".join(LIST_COLUMNS)
    return frame.to_string(index=False)


def render_case(bank: CaseBank, case_id: str) -> str:
    case = bank.get(case_id)
    if case is None:
        raise CaseNotFoundError(case_id)
    lines = [
        f"id:        {case.id}",
        f"kind:      {case.kind.value}",
        f"modality:  {case.modality.value}",
        f"source:    {case.source}",
        f"dim:       {case.dim}",
        f"truncated: {case.truncated}",
    ]
    if case.task_desc:
        lines += ["", "[task]", case.task_desc]
    if case.scaffold:
        lines += ["", "[scaffold]", case.scaffold]
    lines += ["", "[body]", case.body]
    return "\n".join(lines)


def stats_frame(bank: CaseBank) -> pd.DataFrame:
    frame = bank_frame(bank)
    counts = frame.groupby("kind").size() if not frame.empty else pd.Series(dtype="int64")
    return pd.DataFrame(
        {
            "kind": ["insight", "solution", "total"],
            "cases": [int(counts.get("insight", 0)), int(counts.get("solution", 0)), len(frame)],
        }
    )


def render_stats(bank: CaseBank) -> str:
    dim = bank.dim if bank.dim is not None else "-"
    return f"{stats_frame(bank).to_string(index=False)}\nembedding dim: {dim}"
