"""Prompt kit: pipeline prompt templates, reply parsers and log helpers."""

from .base import TEMPLATE_NAMES, PromptLibrary, PromptTemplate, get_library, parse_template
from .diffing import append_log, code_diff, step_header
from .exceptions import CodeExtractionError, DecisionParseError, PromptKitError, PromptRenderError
from .parsers import (
    Plan,
    RankPermutation,
    extract_code,
    format_permutation,
    parse_decision,
    parse_permutation,
    plan_from_reply,
)
from .renderers import (
    AdapterExample,
    fence_for,
    render_adapter,
    render_debugger,
    render_logger,
    render_planner,
    render_programmer,
    render_revise_rank,
    render_solution_extractor,
)

__all__ = [
    "PromptLibrary",
    "PromptTemplate",
    "TEMPLATE_NAMES",
    "get_library",
    "parse_template",
    "AdapterExample",
    "render_revise_rank",
    "render_planner",
    "render_programmer",
    "render_debugger",
    "render_logger",
    "render_adapter",
    "render_solution_extractor",
    "fence_for",
    "RankPermutation",
    "Plan",
    "parse_permutation",
    "format_permutation",
    "parse_decision",
    "plan_from_reply",
    "extract_code",
    "code_diff",
    "append_log",
    "step_header",
    "PromptKitError",
    "PromptRenderError",
    "DecisionParseError",
    "CodeExtractionError",
]
