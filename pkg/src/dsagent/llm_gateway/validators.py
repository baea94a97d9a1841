"""Input validation for provider requests."""

from urllib.parse import urlparse

from .exceptions import GatewayValidationError


class InputValidator:
    """Utility class for request validation and sanitization."""

    @staticmethod
    def validate_base_url(url: str) -> str:
        """
        Normalize a provider base URL.

        Args:
            url: Base URL such as ``https://api.example.com/v1``

        Returns:
            URL with scheme and without trailing slash

        Raises:
            GatewayValidationError: If the URL is empty or has no host
        """
        if not url or not isinstance(url, str):
            raise GatewayValidationError("Base URL cannot be empty", field="base_url")

        url = url.strip()
        if not url.startswith(("http://", "https://")):
            url = f"https://{url}"

        parsed = urlparse(url)
        host = parsed.netloc
        if not host or ("." not in host and ":" not in host and host != "localhost"):
            raise GatewayValidationError(f"Invalid URL format: {url}", field="base_url")

        return url.rstrip("/")

    @staticmethod
    def validate_prompt(prompt: str) -> str:
        if not isinstance(prompt, str) or not prompt.strip():
            raise GatewayValidationError("Prompt must be a non-empty string", field="prompt")
        return prompt
