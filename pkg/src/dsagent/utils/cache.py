"""Caching backends for embedding vectors."""

import asyncio
import hashlib
import json
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

try:
    import redis.asyncio as redis
    REDIS_AVAILABLE = True
except ImportError:
    REDIS_AVAILABLE = False

from .logger import get_logger

logger = get_logger(__name__)


class CacheBackend(ABC):
    """Abstract base class for cache backends."""

    @abstractmethod
    async def get(self, key: str) -> Optional[List[float]]:
        """Get a vector from cache."""

    @abstractmethod
    async def set(self, key: str, value: List[float]) -> None:
        """Store a vector."""

    @abstractmethod
    async def clear(self) -> None:
        """Clear all cache entries."""


class MemoryCache(CacheBackend):
    """In-process cache; entries never expire because embeddings are immutable."""

    def __init__(self, max_entries: int = 10_000):
        self.max_entries = max_entries
        self._cache: Dict[str, List[float]] = {}
        self._lock = asyncio.Lock()

    async def get(self, key: str) -> Optional[List[float]]:
        async with self._lock:
            value = self._cache.get(key)
            return list(value) if value is not None else None

    async def set(self, key: str, value: List[float]) -> None:
        async with self._lock:
            if len(self._cache) >= self.max_entries and key not in self._cache:
                # Drop the oldest insertion
                self._cache.pop(next(iter(self._cache)))
            self._cache[key] = list(value)

    async def clear(self) -> None:
        async with self._lock:
            self._cache.clear()

    def get_stats(self) -> Dict[str, Any]:
        return {"total_entries": len(self._cache), "max_entries": self.max_entries}


class RedisCache(CacheBackend):
    """Redis cache shared by concurrent runs on one machine or cluster."""

    def __init__(self, redis_url: str, key_prefix: str = "dsagent:embedding:"):
        if not REDIS_AVAILABLE:
            raise ImportError("redis package is required for RedisCache")

        self.redis_url = redis_url
        self.key_prefix = key_prefix
        self._client: Optional["redis.Redis"] = None

    async def _get_client(self) -> "redis.Redis":
        if self._client is None:
            self._client = redis.from_url(self.redis_url, decode_responses=True)
        return self._client

    def _make_key(self, key: str) -> str:
        return f"{self.key_prefix}{key}"

    async def get(self, key: str) -> Optional[List[float]]:
        try:
            client = await self._get_client()
            value = await client.get(self._make_key(key))
            if value is None:
                return None
            return [float(x) for x in json.loads(value)]
        except Exception as e:
            logger.error("redis_get_failed", key=key, error=str(e))
            return None

    async def set(self, key: str, value: List[float]) -> None:
        try:
            client = await self._get_client()
            await client.set(self._make_key(key), json.dumps(list(value)))
        except Exception as e:
            logger.error("redis_set_failed", key=key, error=str(e))

    async def clear(self) -> None:
        try:
            client = await self._get_client()
            keys = await client.keys(f"{self.key_prefix}*")
            if keys:
                await client.delete(*keys)
        except Exception as e:
            logger.error("redis_clear_failed", error=str(e))

    async def close(self) -> None:
        if self._client:
            await self._client.close()


class EmbeddingCache:
    """Vector cache keyed by (model, text) with hit/miss statistics."""

    def __init__(self, backend: CacheBackend):
        self.backend = backend
        self._stats = {"hits": 0, "misses": 0, "sets": 0}

    @staticmethod
    def make_key(model: str, text: str) -> str:
        digest = hashlib.sha256(f"{model}\x00{text}".encode("utf-8")).hexdigest()
        return f"{model}:{digest}"

    async def get(self, model: str, text: str) -> Optional[List[float]]:
        value = await self.backend.get(self.make_key(model, text))
        if value is None:
            self._stats["misses"] += 1
        else:
            self._stats["hits"] += 1
        return value

    async def set(self, model: str, text: str, value: List[float]) -> None:
        await self.backend.set(self.make_key(model, text), value)
        self._stats["sets"] += 1

    def get_stats(self) -> Dict[str, Any]:
        total = self._stats["hits"] + self._stats["misses"]
        hit_rate = (self._stats["hits"] / total * 100) if total > 0 else 0
        stats: Dict[str, Any] = {
            **self._stats,
            "total_requests": total,
            "hit_rate_percent": round(hit_rate, 2),
        }
        if hasattr(self.backend, "get_stats"):
            stats["backend_stats"] = self.backend.get_stats()
        return stats

    async def close(self) -> None:
        if hasattr(self.backend, "close"):
            await self.backend.close()


def create_embedding_cache(redis_url: Optional[str] = None) -> EmbeddingCache:
    """
    Create an embedding cache with the appropriate backend.

    Args:
        redis_url: Redis URL (if None, uses memory cache)

    Returns:
        Configured embedding cache
    """
    backend: CacheBackend
    if redis_url and REDIS_AVAILABLE:
        try:
            backend = RedisCache(redis_url)
            logger.info("embedding_cache_backend", backend="redis")
        except Exception as e:
            logger.warning("redis_unavailable_falling_back", error=str(e))
            backend = MemoryCache()
    else:
        backend = MemoryCache()
        logger.debug("embedding_cache_backend", backend="memory")

    return EmbeddingCache(backend)
