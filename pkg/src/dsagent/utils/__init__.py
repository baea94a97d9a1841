"""Utilities package."""

from .cache import EmbeddingCache, MemoryCache, RedisCache, create_embedding_cache
from .logger import get_logger, setup_logging
from .trace import TraceWriter, read_trace

__all__ = [
    "get_logger",
    "setup_logging",
    "EmbeddingCache",
    "MemoryCache",
    "RedisCache",
    "create_embedding_cache",
    "TraceWriter",
    "read_trace",
]
