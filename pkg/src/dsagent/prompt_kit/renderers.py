"""Render functions for each pipeline prompt."""

import re
from typing import Optional, Sequence

from pydantic import BaseModel, Field

from .base import get_library
from .exceptions import PromptRenderError

_BACKTICK_RUN = re.compile(r"`+")


class AdapterExample(BaseModel):
    """One retrieved (task, scaffold, solution) triple shown to the Adapter."""

    task: str = Field(..., min_length=1)
    scaffold: str = Field(..., min_length=1)
    solution: str = Field(..., min_length=1)


def _require(template: str, **values: str) -> None:
    for slot, value in values.items():
        if not value or not value.strip():
            raise PromptRenderError(template, f"slot '{slot}' must be non-empty")


def render_revise_rank(task: str, experiment_log: str, cases: Sequence[str]) -> str:
    if not cases:
        raise PromptRenderError("revise_rank", "at least one case is required")
    return get_library().render("revise_rank", task=task, experiment_log=experiment_log, cases=list(cases))


def render_planner(task: str, experiment_log: str, script: str, case: Optional[str]) -> str:
    """Planner prompt; ``case=None`` drops the case block (retrieval disabled)."""
    if case is not None:
        _require("planner", case=case)
    return get_library().render(
        "planner", task=task, experiment_log=experiment_log, script=script, case=case
    )


def render_programmer(script: str, plan: str) -> str:
    _require("programmer", plan=plan)
    return get_library().render("programmer", script=script, plan=plan)


def render_debugger(original_script: str, plan: str, buggy_script: str, exec_log: str) -> str:
    _require("debugger", exec_log=exec_log)
    return get_library().render(
        "debugger",
        original_script=original_script,
        plan=plan,
        buggy_script=buggy_script,
        exec_log=exec_log,
    )


def render_logger(plan: str, exec_log: str, diff: str, running_log: str) -> str:
    return get_library().render(
        "logger", plan=plan, exec_log=exec_log, diff=diff, running_log=running_log
    )


def render_adapter(examples: Sequence[AdapterExample], task: str, scaffold: str) -> str:
    """Adapter prompt with ``len(examples)`` solved cases; none gives the zero-shot form."""
    _require("adapter", task=task, scaffold=scaffold)
    return get_library().render("adapter", examples=list(examples), task=task, scaffold=scaffold)


def fence_for(code: str) -> str:
    """Backtick fence longer than any backtick run inside ``code``."""
    longest = max((len(m.group(0)) for m in _BACKTICK_RUN.finditer(code)), default=0)
    return "`" * max(3, longest + 1)


def render_solution_extractor(code: str) -> str:
    _require("solution_extractor", code=code)
    return get_library().render("solution_extractor", code=code, fence=fence_for(code))
