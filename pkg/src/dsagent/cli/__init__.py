"""Operator surface: configuration, provider wiring and the ``ds`` command."""

from .config import AppConfig, ConfigError, Secrets, load_config
from .main import build_parser, main
from .providers import Runtime, build_runtime

__all__ = [
    "AppConfig",
    "ConfigError",
    "Secrets",
    "load_config",
    "build_parser",
    "main",
    "Runtime",
    "build_runtime",
]
