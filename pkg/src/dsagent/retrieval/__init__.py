"""Retrieval package: embedding providers and cosine top-k search."""

from .embedders import Embedder, EmbeddingProvider, HashingEmbeddingProvider, HttpEmbeddingProvider
from .exceptions import (
    DimensionMismatchError,
    EmbeddingError,
    EmptyBankError,
    RetrievalError,
    WrongBankError,
    ZeroNormError,
)
from .models import Embedding, ScoredCase
from .similarity import cosine, retrieve_best_pair, top_k

__all__ = [
    "Embedder",
    "EmbeddingProvider",
    "HashingEmbeddingProvider",
    "HttpEmbeddingProvider",
    "Embedding",
    "ScoredCase",
    "cosine",
    "top_k",
    "retrieve_best_pair",
    "RetrievalError",
    "EmbeddingError",
    "DimensionMismatchError",
    "ZeroNormError",
    "EmptyBankError",
    "WrongBankError",
]
