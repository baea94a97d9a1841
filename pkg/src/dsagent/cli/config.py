"""Application configuration: YAML document, env interpolation, secrets."""

import os
import re
import sys
from decimal import Decimal
from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, Field, SecretStr, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..deploy_pipeline.models import DeployConfig, DeploySelection
from ..dev_pipeline.models import DevConfig, PipelineMode
from ..executor.analysis import compile_metric_pattern
from ..executor.models import MetricDirection
from ..llm_gateway.pricing import PriceTable

_ENV_REF = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)(?::([^}]*))?\}")


class ConfigError(Exception):
    """Raised for an unreadable or invalid configuration."""

    def __init__(self, message: str):
        self.message = message
        self.error_code = "CONFIG_INVALID"
        super().__init__(message)


class ProviderConfig(BaseModel):
    """Chat completion endpoint."""

    base_url: str = Field("https://api.openai.com/v1", description="OpenAI-compatible API root")
    chat_model: str = Field("gpt-4-0613", min_length=1)
    timeout: float = Field(120.0, gt=0, description="Request timeout in seconds")
    max_attempts: int = Field(5, ge=1, description="Attempts per request including the first")
    backoff_base: float = Field(1.0, ge=0)
    backoff_cap: float = Field(30.0, ge=0)
    requests_per_minute: int = Field(0, ge=0, description="0 disables throttling")
    burst_size: int = Field(10, ge=1)
    max_tokens: Optional[int] = Field(None, ge=1)


class EmbeddingConfig(BaseModel):
    backend: Literal["http", "hashing"] = "http"
    base_url: Optional[str] = Field(None, description="Defaults to the chat provider URL")
    model: str = Field("BAAI/llm-embedder", min_length=1)
    max_chars: Optional[int] = Field(8000, ge=1)
    hashing_dim: int = Field(64, ge=1)
    cache_enabled: bool = True
    cache_redis_url: Optional[str] = None

    @field_validator("cache_redis_url", "base_url", mode="before")
    @classmethod
    def blank_is_none(cls, v: Any) -> Any:
        return v or None


class PricingConfig(BaseModel):
    input_per_million: Decimal = Field(Decimal("0"), ge=0)
    output_per_million: Decimal = Field(Decimal("0"), ge=0)

    def price_table(self) -> PriceTable:
        return PriceTable(input_per_million=self.input_per_million, output_per_million=self.output_per_million)


class DevelopmentSection(BaseModel):
    k: int = Field(5, ge=1)
    iterations: int = Field(5, ge=1)
    max_debug_attempts: int = Field(5, ge=0)
    temperature: float = Field(0.5, ge=0.0, le=2.0)
    mode: PipelineMode = PipelineMode.FULL
    max_log_chars: int = Field(4000, ge=100)


class DeploymentSection(BaseModel):
    n_examples: int = Field(1, ge=0)
    selection: DeploySelection = DeploySelection.RETRIEVED
    temperature: float = Field(0.7, ge=0.0, le=2.0)
    rng_seed: Optional[int] = None
    concurrency: int = Field(1, ge=1)


class SandboxSection(BaseModel):
    timeout: float = Field(3600.0, gt=0)
    interpreter: str = Field(sys.executable, min_length=1)
    max_output_bytes: int = Field(1_000_000, ge=1)
    memory_mb: Optional[int] = Field(None, ge=1)
    max_processes: Optional[int] = Field(None, ge=1)


class BanksSection(BaseModel):
    insight: Path = Path("bank/insight")
    agent: Path = Path("bank/agent")


class TaskDefaults(BaseModel):
    """Fallbacks for tasks without a task.yaml."""

    direction: Optional[MetricDirection] = None
    metric_pattern: Optional[str] = None

    @field_validator("metric_pattern")
    @classmethod
    def one_group(cls, v: Optional[str]) -> Optional[str]:
        if v:
            try:
                compile_metric_pattern(v)
            except Exception as e:
                raise ValueError(str(e)) from e
        return v or None


class LoggingSection(BaseModel):
    level: str = "INFO"
    format: Literal["console", "json"] = "console"


class AppConfig(BaseModel):
    """Whole configuration document, validated at startup."""

    provider: ProviderConfig = Field(default_factory=ProviderConfig)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    pricing: PricingConfig = Field(default_factory=PricingConfig)
    development: DevelopmentSection = Field(default_factory=DevelopmentSection)
    deployment: DeploymentSection = Field(default_factory=DeploymentSection)
    sandbox: SandboxSection = Field(default_factory=SandboxSection)
    banks: BanksSection = Field(default_factory=BanksSection)
    tasks: TaskDefaults = Field(default_factory=TaskDefaults)
    runs_dir: Path = Path("runs")
    logging: LoggingSection = Field(default_factory=LoggingSection)

    def dev_config(self, **overrides: Any) -> DevConfig:
        dev = self.development
        values = dict(
            k=dev.k,
            iterations=dev.iterations,
            max_debug_attempts=dev.max_debug_attempts,
            temperature=dev.temperature,
            mode=dev.mode,
            max_log_chars=dev.max_log_chars,
            model=self.provider.chat_model,
            max_tokens=self.provider.max_tokens,
            timeout=self.sandbox.timeout,
            interpreter=self.sandbox.interpreter,
            max_output_bytes=self.sandbox.max_output_bytes,
            memory_mb=self.sandbox.memory_mb,
            max_processes=self.sandbox.max_processes,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return DevConfig(**values)

    def deploy_config(self, **overrides: Any) -> DeployConfig:
        dep = self.deployment
        values = dict(
            n_examples=dep.n_examples,
            selection=dep.selection,
            temperature=dep.temperature,
            rng_seed=dep.rng_seed,
            model=self.provider.chat_model,
            max_tokens=self.provider.max_tokens,
            timeout=self.sandbox.timeout,
            interpreter=self.sandbox.interpreter,
            max_output_bytes=self.sandbox.max_output_bytes,
            memory_mb=self.sandbox.memory_mb,
            max_processes=self.sandbox.max_processes,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return DeployConfig(**values)


class Secrets(BaseSettings):
    """Credentials from the environment or ``.env``; never from the YAML file."""

    model_config = SettingsConfigDict(
        env_prefix="DSAGENT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    api_key: Optional[SecretStr] = Field(None, description="Bearer token for the provider")


def interpolate(value: Any) -> Any:
    """Expand ``${VAR}`` and ``${VAR:default}`` in every string of a YAML tree."""
    if isinstance(value, dict):
        return {k: interpolate(v) for k, v in value.items()}
    if isinstance(value, list):
        return [interpolate(v) for v in value]
    if not isinstance(value, str):
        return value

    def replace(match: "re.Match[str]") -> str:
        name, default = match.group(1), match.group(2)
        if name in os.environ:
            return os.environ[name]
        if default is not None:
            return default
        raise ConfigError(f"Environment variable {name} is not set and has no default")

    return _ENV_REF.sub(replace, value)


def load_config(path: Optional[Path] = None) -> AppConfig:
    """
    Read and validate the configuration document.

    ``None`` yields the built-in defaults.

    Raises:
        ConfigError: Missing file, bad YAML, unset variable or invalid field
    """
    if path is None:
        return AppConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must contain a mapping at the top level")
    try:
        return AppConfig.model_validate(interpolate(raw))
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid configuration in {path}: {problems}") from e
