"""Prompt templates backed by YAML front matter plus a Jinja2 body."""

from dataclasses import dataclass
from importlib import resources
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

import yaml
from jinja2 import Environment, StrictUndefined, Template, UndefinedError

from ..utils.logger import get_logger
from .exceptions import PromptRenderError

logger = get_logger(__name__)

TEMPLATE_SUFFIX = ".md.j2"
TEMPLATE_NAMES = (
    "revise_rank",
    "planner",
    "programmer",
    "debugger",
    "logger",
    "adapter",
    "solution_extractor",
)

_JINJA_ENV = Environment(
    autoescape=False,
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=False,
)


@dataclass(frozen=True)
class PromptTemplate:
    """Parsed template: metadata from the front matter, compiled body."""

    name: str
    metadata: Mapping[str, Any]
    template: Template

    @property
    def required_slots(self) -> Tuple[str, ...]:
        requires = self.metadata.get("requires", ())
        if isinstance(requires, str):
            return (requires,)
        if isinstance(requires, Iterable):
            return tuple(str(slot) for slot in requires)
        return ()

    @property
    def description(self) -> str:
        return str(self.metadata.get("description", ""))

    def render(self, **slots: Any) -> str:
        missing = [slot for slot in self.required_slots if slot not in slots or slots[slot] is None]
        if missing:
            raise PromptRenderError(self.name, f"missing slots {missing}")
        try:
            return self.template.render(**slots)
        except UndefinedError as e:
            raise PromptRenderError(self.name, str(e)) from e


def parse_template(text: str) -> Tuple[Dict[str, Any], str]:
    """Split ``---`` delimited YAML front matter from the template body."""
    if not text.startswith("---\n"):
        return {}, text
    end = text.find("\n---\n", 4)
    if end == -1:
        raise ValueError("Unterminated YAML front matter in template")
    metadata = yaml.safe_load(text[4:end]) or {}
    if not isinstance(metadata, dict):
        raise ValueError("Template front matter must be a mapping")
    return metadata, text[end + len("\n---\n") :]


class PromptLibrary:
    """Loads and caches the packaged templates."""

    def __init__(self, package: str = f"{__package__}.templates"):
        self.package = package
        self._cache: Dict[str, PromptTemplate] = {}

    def get(self, name: str) -> PromptTemplate:
        if name not in self._cache:
            if name not in TEMPLATE_NAMES:
                raise PromptRenderError(name, "unknown template")
            source = resources.files(self.package).joinpath(name + TEMPLATE_SUFFIX)
            metadata, body = parse_template(source.read_text(encoding="utf-8"))
            self._cache[name] = PromptTemplate(
                name=name, metadata=metadata, template=_JINJA_ENV.from_string(body)
            )
            logger.debug("template_loaded", name=name)
        return self._cache[name]

    def render(self, name: str, **slots: Any) -> str:
        return self.get(name).render(**slots)


_default_library: Optional[PromptLibrary] = None


def get_library() -> PromptLibrary:
    global _default_library
    if _default_library is None:
        _default_library = PromptLibrary()
    return _default_library
