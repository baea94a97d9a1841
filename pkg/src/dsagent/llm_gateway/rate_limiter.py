"""Client-side request throttle for provider calls."""

import asyncio
import time
from typing import Callable, Optional

from ..utils.logger import get_logger

logger = get_logger(__name__)


class RateLimiter:
    """Token bucket limiting provider requests per minute.

    A limit of 0 disables throttling.
    """

    def __init__(
        self,
        requests_per_minute: int = 0,
        burst_size: Optional[int] = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.requests_per_minute = requests_per_minute
        self.burst_size = burst_size or max(requests_per_minute, 1)
        self._clock = clock
        self.tokens = float(self.burst_size)
        self.last_refill = clock()
        self._lock = asyncio.Lock()

    @property
    def enabled(self) -> bool:
        return self.requests_per_minute > 0

    def _refill(self) -> None:
        now = self._clock()
        elapsed = now - self.last_refill
        if elapsed > 0:
            rate_per_second = self.requests_per_minute / 60.0
            self.tokens = min(float(self.burst_size), self.tokens + elapsed * rate_per_second)
            self.last_refill = now

    async def acquire(self) -> bool:
        """Take one token if available."""
        if not self.enabled:
            return True
        async with self._lock:
            self._refill()
            if self.tokens >= 1:
                self.tokens -= 1
                return True
            return False

    def wait_time(self) -> float:
        """Seconds until one token is available."""
        deficit = 1 - self.tokens
        if deficit <= 0 or not self.enabled:
            return 0.0
        return deficit * 60.0 / self.requests_per_minute

    async def wait_for_token(self) -> None:
        while not await self.acquire():
            delay = self.wait_time()
            logger.debug("throttled", wait_seconds=round(delay, 3))
            await asyncio.sleep(delay)
