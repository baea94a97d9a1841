"""Prompt rendering and reply parsing errors."""

from typing import Optional


class PromptKitError(Exception):
    """Base exception for prompt rendering and reply parsing."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        self.message = message
        self.error_code = error_code
        super().__init__(message)


class PromptRenderError(PromptKitError):
    """Raised when a template cannot be filled."""

    def __init__(self, template: str, detail: str):
        self.template = template
        super().__init__(f"Cannot render prompt '{template}': {detail}", error_code="PROMPT_RENDER")


class DecisionParseError(PromptKitError):
    """Raised when a planner reply has no [Decision] section."""

    def __init__(self, message: str = "Reply has no [Decision] section"):
        super().__init__(message, error_code="DECISION_PARSE")


class CodeExtractionError(PromptKitError):
    """Raised when a reply carries no python-tagged fenced block."""

    def __init__(self, message: str = "Reply has no ```python block"):
        super().__init__(message, error_code="CODE_EXTRACTION")
