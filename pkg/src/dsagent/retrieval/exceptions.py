"""Retrieval errors."""

from typing import Optional


class RetrievalError(Exception):
    """Base exception for embedding and similarity errors."""

    def __init__(self, message: str, error_code: Optional[str] = None):
        self.message = message
        self.error_code = error_code
        super().__init__(message)


class EmbeddingError(RetrievalError):
    """Raised when the embedding provider fails or returns an unusable vector."""

    def __init__(self, message: str, original_error: Optional[Exception] = None):
        self.original_error = original_error
        super().__init__(message, error_code="EMBEDDING_FAILED")


class DimensionMismatchError(RetrievalError):
    """Raised when two vectors (or two provider calls) disagree on dimension."""

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"Embedding dimension mismatch: expected {expected}, got {actual}",
            error_code="DIMENSION_MISMATCH",
        )


class ZeroNormError(RetrievalError):
    """Raised for an all-zero vector, which has no direction."""

    def __init__(self, message: str = "Embedding has zero norm"):
        super().__init__(message, error_code="ZERO_NORM")


class EmptyBankError(RetrievalError):
    """Raised when retrieving from a bank without cases."""

    def __init__(self, message: str = "Cannot retrieve from an empty case bank"):
        super().__init__(message, error_code="EMPTY_BANK")


class WrongBankError(RetrievalError):
    """Raised when a solution-pair lookup meets insight cases."""

    def __init__(self, message: str):
        super().__init__(message, error_code="WRONG_BANK")
