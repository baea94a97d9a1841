"""Embedding providers and the metered Embedder facade."""

import hashlib
import re
from typing import List, Optional, Protocol, runtime_checkable

from pydantic import ValidationError

from ..llm_gateway.client import ProviderHttpClient
from ..llm_gateway.exceptions import GatewayError
from ..utils.cache import EmbeddingCache
from ..utils.logger import get_logger
from ..utils.trace import TraceWriter
from .exceptions import DimensionMismatchError, EmbeddingError
from .models import Embedding

logger = get_logger(__name__)

_TOKEN_RE = re.compile(r"\w+")


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Backend turning text into a raw float vector."""

    model: str
    max_chars: Optional[int]

    async def embed_raw(self, text: str) -> List[float]: ...


class HttpEmbeddingProvider:
    """OpenAI-compatible ``/embeddings`` endpoint."""

    def __init__(self, client: ProviderHttpClient, model: str, max_chars: Optional[int] = 8000):
        self.client = client
        self.model = model
        self.max_chars = max_chars

    async def embed_raw(self, text: str) -> List[float]:
        data, _ = await self.client.post_json("embeddings", {"model": self.model, "input": text})
        try:
            return [float(x) for x in data["data"][0]["embedding"]]
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise EmbeddingError(f"Unexpected embedding response shape: {e}", original_error=e) from e

    async def close(self) -> None:
        await self.client.close()


class HashingEmbeddingProvider:
    """Offline bag-of-words embedder.

    Each lowercase ``\\w+`` token increments the slot given by its sha256
    digest modulo ``dim``. Deterministic across processes and platforms.
    """

    def __init__(self, dim: int = 64, max_chars: Optional[int] = None):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.model = f"hashing-bow-{dim}"
        self.max_chars = max_chars

    async def embed_raw(self, text: str) -> List[float]:
        vec = [0.0] * self.dim
        for token in _TOKEN_RE.findall(text.lower()):
            slot = int(hashlib.sha256(token.encode("utf-8")).hexdigest(), 16) % self.dim
            vec[slot] += 1.0
        return vec


class Embedder:
    """
    Facade every pipeline embeds through.

    Counts calls, truncates over-long inputs, consults an optional cache,
    rejects dimension drift between calls and writes an ``embedding``
    trace record per request.
    """

    def __init__(
        self,
        provider: EmbeddingProvider,
        cache: Optional[EmbeddingCache] = None,
        parent: Optional["Embedder"] = None,
    ):
        self.provider = provider
        self.cache = cache
        self.calls = 0
        self._parent = parent
        self._dim: Optional[int] = None

    @property
    def model(self) -> str:
        return self.provider.model

    @property
    def dim(self) -> Optional[int]:
        if self._parent is not None:
            return self._parent.dim
        return self._dim

    @dim.setter
    def dim(self, value: Optional[int]) -> None:
        if self._parent is not None:
            self._parent.dim = value
        else:
            self._dim = value

    def scoped(self) -> "Embedder":
        """View sharing provider, cache and dimension, with its own call counter."""
        return Embedder(self.provider, self.cache, parent=self)

    def _count(self) -> None:
        self.calls += 1
        if self._parent is not None:
            self._parent._count()

    async def embed(self, text: str, trace: Optional[TraceWriter] = None) -> Embedding:
        """
        Embed one text.

        Raises:
            EmbeddingError: Empty text or provider failure
            DimensionMismatchError: Provider changed dimension between calls
            ZeroNormError: Provider returned an all-zero vector
        """
        if not text or not text.strip():
            raise EmbeddingError("Cannot embed empty text")

        truncated = False
        max_chars = self.provider.max_chars
        if max_chars is not None and len(text) > max_chars:
            text = text[:max_chars]
            truncated = True
            logger.warning("embedding_input_truncated", max_chars=max_chars)

        self._count()
        cached = False
        values: Optional[List[float]] = None
        if self.cache is not None:
            values = await self.cache.get(self.model, text)
            cached = values is not None
        if values is None:
            try:
                values = await self.provider.embed_raw(text)
            except GatewayError as e:
                raise EmbeddingError(f"Embedding provider failed: {e.message}", original_error=e) from e

        if self.dim is not None and len(values) != self.dim:
            raise DimensionMismatchError(self.dim, len(values))

        try:
            embedding = Embedding(values=tuple(values), truncated=truncated)
        except ValidationError as e:
            raise EmbeddingError(f"Invalid embedding: {e}", original_error=e) from e

        self.dim = embedding.dim
        if self.cache is not None and not cached:
            await self.cache.set(self.model, text, list(values))
        if trace is not None:
            await trace.awrite(
                "embedding",
                model=self.model,
                chars=len(text),
                dim=embedding.dim,
                truncated=truncated,
            )
        return embedding
