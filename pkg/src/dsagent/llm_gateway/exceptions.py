"""Custom exceptions for the LLM gateway."""

from typing import Any, Dict, Optional


class GatewayError(Exception):
    """Base exception for LLM gateway errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        status_code: Optional[int] = None,
    ):
        self.message = message
        self.error_code = error_code
        self.status_code = status_code
        super().__init__(message)


class AuthenticationError(GatewayError):
    """Raised when the provider rejects the API key."""

    def __init__(self, message: str = "Authentication failed"):
        super().__init__(message, error_code="AUTH_FAILED", status_code=401)


class NetworkError(GatewayError):
    """Raised when communication with the provider fails after all retries."""

    def __init__(
        self,
        message: str,
        original_error: Optional[Exception] = None,
        attempts: int = 0,
    ):
        self.original_error = original_error
        self.attempts = attempts
        super().__init__(message, error_code="NETWORK_ERROR")


class APIError(GatewayError):
    """Raised when the provider returns a non-retryable error payload."""

    def __init__(
        self,
        message: str,
        status_code: int,
        error_code: Optional[str] = None,
        response_data: Optional[Dict[str, Any]] = None,
    ):
        self.response_data = response_data
        super().__init__(message, error_code=error_code, status_code=status_code)


class RateLimitError(GatewayError):
    """Raised when the provider keeps answering 429 after all retries."""

    def __init__(
        self,
        message: str = "Rate limit exceeded",
        retry_after: Optional[float] = None,
    ):
        self.retry_after = retry_after
        super().__init__(message, error_code="RATE_LIMIT", status_code=429)


class ServerError(GatewayError):
    """Raised when the provider keeps answering 5xx after all retries."""

    def __init__(self, message: str, status_code: int = 500):
        super().__init__(message, error_code="SERVER_ERROR", status_code=status_code)


class ReplayMissError(GatewayError):
    """Raised in strict replay mode when a request was never recorded."""

    def __init__(self, fingerprint: str):
        self.fingerprint = fingerprint
        super().__init__(
            f"No recorded response for request fingerprint {fingerprint}",
            error_code="REPLAY_MISS",
        )


class GatewayValidationError(GatewayError):
    """Raised when a request is rejected before reaching the provider."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(message, error_code="VALIDATION_ERROR", status_code=400)
