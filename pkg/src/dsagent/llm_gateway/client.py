"""HTTP providers speaking the de-facto chat-completions / embeddings JSON shape."""

import asyncio
import time
from typing import Any, Dict, Optional, Tuple

import httpx

from ..utils.logger import get_logger
from .exceptions import (
    APIError,
    AuthenticationError,
    GatewayError,
    NetworkError,
    RateLimitError,
    ServerError,
)
from .models import LlmParams, ProviderReply
from .rate_limiter import RateLimiter
from .validators import InputValidator

logger = get_logger(__name__)

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class ProviderHttpClient:
    """Async JSON client with bounded retries and exponential backoff."""

    def __init__(
        self,
        base_url: str,
        api_key: Optional[str] = None,
        timeout: float = 120.0,
        max_attempts: int = 5,
        backoff_base: float = 1.0,
        backoff_cap: float = 30.0,
        rate_limiter: Optional[RateLimiter] = None,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        """
        Initialize the provider client.

        Args:
            base_url: Provider URL prefix, e.g. ``https://api.example.com/v1``
            api_key: Bearer token (optional for local open-model servers)
            timeout: Request timeout in seconds
            max_attempts: Total attempts per request, first try included
            backoff_base: First backoff delay in seconds; doubles per retry
            backoff_cap: Upper bound on a single backoff delay
            rate_limiter: Shared request throttle
            transport: Custom httpx transport (tests)
        """
        self.base_url = InputValidator.validate_base_url(base_url)
        self.max_attempts = max(1, max_attempts)
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self.rate_limiter = rate_limiter or RateLimiter()

        headers = {
            "Accept": "application/json",
            "Content-Type": "application/json",
            "User-Agent": "dsagent/0.1",
        }
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        self._client = httpx.AsyncClient(
            base_url=self.base_url + "/",
            timeout=httpx.Timeout(timeout),
            headers=headers,
            transport=transport,
        )

    async def __aenter__(self) -> "ProviderHttpClient":
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        await self.close()

    async def close(self) -> None:
        await self._client.aclose()

    async def post_json(self, endpoint: str, payload: Dict[str, Any]) -> Tuple[Dict[str, Any], int]:
        """
        POST a JSON payload with retry logic.

        Returns:
            Parsed response body and the number of retries that were needed

        Raises:
            GatewayError: Typed by failure class once retries are exhausted
        """
        url = endpoint.lstrip("/")
        start_time = time.monotonic()
        last_error: Optional[GatewayError] = None

        for attempt in range(self.max_attempts):
            await self.rate_limiter.wait_for_token()
            logger.debug(
                "provider_request",
                url=url,
                attempt=attempt + 1,
                max_attempts=self.max_attempts,
            )
            try:
                response = await self._client.post(url, json=payload)
            except httpx.TimeoutException as e:
                last_error = NetworkError(f"Request timeout: {e}", original_error=e, attempts=attempt + 1)
            except httpx.TransportError as e:
                last_error = NetworkError(f"Network error: {e}", original_error=e, attempts=attempt + 1)
            else:
                duration_ms = (time.monotonic() - start_time) * 1000
                logger.debug(
                    "provider_response",
                    url=url,
                    status_code=response.status_code,
                    duration_ms=round(duration_ms, 2),
                )
                if response.status_code < 400:
                    return self._parse_response(response), attempt

                error = self._error_for(response)
                if response.status_code not in RETRYABLE_STATUS:
                    raise error
                last_error = error

            if attempt + 1 < self.max_attempts:
                logger.warning(
                    "provider_retry",
                    url=url,
                    attempt=attempt + 1,
                    error=last_error.message if last_error else None,
                )
                await self._wait_before_retry(attempt, last_error)

        assert last_error is not None
        logger.error("provider_retries_exhausted", url=url, attempts=self.max_attempts)
        raise last_error

    def _parse_response(self, response: httpx.Response) -> Dict[str, Any]:
        try:
            data = response.json()
        except ValueError as e:
            raise APIError(
                f"Provider returned non-JSON body: {response.text[:200]}",
                status_code=response.status_code,
            ) from e
        if not isinstance(data, dict):
            raise APIError("Provider returned a non-object JSON body", status_code=response.status_code)
        return data

    def _error_for(self, response: httpx.Response) -> GatewayError:
        """Map an HTTP error response to an exception, keeping the payload verbatim."""
        status_code = response.status_code
        error_data: Optional[Dict[str, Any]]
        try:
            error_data = response.json()
            error_message = response.text
        except ValueError:
            error_data = None
            error_message = f"HTTP {status_code}: {response.text}"

        if status_code in (401, 403):
            return AuthenticationError(error_message)
        if status_code == 429:
            retry_after = response.headers.get("Retry-After")
            try:
                retry_after_s = float(retry_after) if retry_after else None
            except ValueError:
                retry_after_s = None
            return RateLimitError(error_message, retry_after=retry_after_s)
        if status_code >= 500:
            return ServerError(error_message, status_code)
        return APIError(error_message, status_code, response_data=error_data)

    async def _wait_before_retry(self, attempt: int, error: Optional[GatewayError]) -> None:
        wait_time = min(self.backoff_base * (2 ** attempt), self.backoff_cap)
        if isinstance(error, RateLimitError) and error.retry_after is not None:
            wait_time = min(max(wait_time, error.retry_after), self.backoff_cap)
        await asyncio.sleep(wait_time)


class HttpChatProvider:
    """Live chat provider over ``POST {base_url}/chat/completions``."""

    def __init__(self, client: ProviderHttpClient):
        self.client = client

    async def chat(self, prompt: str, params: LlmParams) -> ProviderReply:
        payload: Dict[str, Any] = {
            "model": params.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
        }
        if params.max_tokens is not None:
            payload["max_tokens"] = params.max_tokens

        data, retries = await self.client.post_json("chat/completions", payload)

        try:
            choice = data["choices"][0]
            text = choice["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as e:
            raise APIError(f"Malformed chat response: {data}", status_code=200, response_data=data) from e

        usage = data.get("usage") or {}
        return ProviderReply(
            text=text,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            retries=retries,
            truncated=choice.get("finish_reason") == "length",
        )

    async def close(self) -> None:
        await self.client.close()
