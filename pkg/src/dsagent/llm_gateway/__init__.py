"""LLM gateway package: chat providers, replay cassettes and cost metering."""

from .client import HttpChatProvider, ProviderHttpClient
from .exceptions import (
    APIError,
    AuthenticationError,
    GatewayError,
    GatewayValidationError,
    NetworkError,
    RateLimitError,
    ReplayMissError,
    ServerError,
)
from .gateway import LlmGateway
from .models import LlmExchange, LlmParams, ProviderReply
from .pricing import PriceTable, total_cost
from .providers import ChatProvider, ScriptedChatProvider, estimate_tokens
from .rate_limiter import RateLimiter
from .replay import Cassette, RecordingProvider, ReplayProvider
from .validators import InputValidator

__all__ = [
    # Gateway
    "LlmGateway",
    "total_cost",
    "PriceTable",
    # Providers
    "ChatProvider",
    "HttpChatProvider",
    "ProviderHttpClient",
    "ScriptedChatProvider",
    "ReplayProvider",
    "RecordingProvider",
    "Cassette",
    "estimate_tokens",
    # Models
    "LlmParams",
    "LlmExchange",
    "ProviderReply",
    # Exceptions
    "GatewayError",
    "AuthenticationError",
    "NetworkError",
    "APIError",
    "RateLimitError",
    "ServerError",
    "ReplayMissError",
    "GatewayValidationError",
    # Utilities
    "InputValidator",
    "RateLimiter",
]
