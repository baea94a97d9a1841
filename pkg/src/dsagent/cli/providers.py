"""Builds the gateway and embedder a command runs against."""

from pathlib import Path
from typing import List, Optional

from ..llm_gateway.client import HttpChatProvider, ProviderHttpClient
from ..llm_gateway.gateway import LlmGateway
from ..llm_gateway.providers import ChatProvider
from ..llm_gateway.rate_limiter import RateLimiter
from ..llm_gateway.replay import Cassette, RecordingProvider, ReplayProvider
from ..retrieval.embedders import Embedder, HashingEmbeddingProvider, HttpEmbeddingProvider
from ..utils.cache import EmbeddingCache, create_embedding_cache
from ..utils.logger import get_logger
from .config import AppConfig, ConfigError, Secrets

logger = get_logger(__name__)


class Runtime:
    """Live objects of one command; close with ``aclose``."""

    def __init__(
        self,
        gateway: LlmGateway,
        embedder: Embedder,
        clients: List[ProviderHttpClient],
        cache: Optional[EmbeddingCache] = None,
    ):
        self.gateway = gateway
        self.embedder = embedder
        self.clients = clients
        self.cache = cache

    async def aclose(self) -> None:
        for client in self.clients:
            await client.close()
        if self.cache is not None:
            logger.info("embedding_cache_stats", **self.cache.get_stats())
            await self.cache.close()


def build_runtime(
    cfg: AppConfig,
    secrets: Secrets,
    record: Optional[Path] = None,
    replay: Optional[Path] = None,
    chat_provider: Optional[ChatProvider] = None,
) -> Runtime:
    """
    Wire providers for live, record or replay operation.

    ``chat_provider`` replaces the HTTP provider (tests, local stubs).

    Raises:
        ConfigError: Record and replay requested together, or replay cassette missing
    """
    if record is not None and replay is not None:
        raise ConfigError("--record and --replay are mutually exclusive")

    api_key = secrets.api_key.get_secret_value() if secrets.api_key else None
    limiter = RateLimiter(cfg.provider.requests_per_minute, cfg.provider.burst_size)
    clients: List[ProviderHttpClient] = []

    def http_client(base_url: str) -> ProviderHttpClient:
        client = ProviderHttpClient(
            base_url,
            api_key=api_key,
            timeout=cfg.provider.timeout,
            max_attempts=cfg.provider.max_attempts,
            backoff_base=cfg.provider.backoff_base,
            backoff_cap=cfg.provider.backoff_cap,
            rate_limiter=limiter,
        )
        clients.append(client)
        return client

    provider: ChatProvider
    if replay is not None:
        if not Path(replay).is_file():
            raise ConfigError(f"Replay cassette not found: {replay}")
        provider = ReplayProvider(Cassette.load(replay), strict=True)
        logger.info("replay_mode", cassette=str(replay))
    else:
        provider = chat_provider or HttpChatProvider(http_client(cfg.provider.base_url))
        if record is not None:
            provider = RecordingProvider(provider, Cassette.load(record))
            logger.info("record_mode", cassette=str(record))

    emb = cfg.embedding
    if emb.backend == "hashing":
        embedding_provider = HashingEmbeddingProvider(dim=emb.hashing_dim, max_chars=emb.max_chars)
    else:
        if replay is not None:
            logger.warning("replay_with_http_embeddings", detail="embedding requests still reach the network")
        embedding_provider = HttpEmbeddingProvider(
            http_client(emb.base_url or cfg.provider.base_url), emb.model, max_chars=emb.max_chars
        )
    cache = create_embedding_cache(emb.cache_redis_url) if emb.cache_enabled else None

    return Runtime(
        gateway=LlmGateway(provider, cfg.pricing.price_table()),
        embedder=Embedder(embedding_provider, cache=cache),
        clients=clients,
        cache=cache,
    )
