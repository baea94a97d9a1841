"""Single completion entry point with metering and tracing."""

from typing import Optional

from ..utils.logger import get_logger
from ..utils.trace import TraceWriter
from .models import LlmExchange, LlmParams
from .pricing import PriceTable
from .providers import ChatProvider
from .validators import InputValidator

logger = get_logger(__name__)


class LlmGateway:
    """Wraps a chat provider; every call becomes a priced LlmExchange."""

    def __init__(self, provider: ChatProvider, price_table: Optional[PriceTable] = None):
        self.provider = provider
        self.price_table = price_table or PriceTable()

    async def complete(
        self,
        prompt: str,
        params: LlmParams,
        role: str = "chat",
        trace: Optional[TraceWriter] = None,
    ) -> LlmExchange:
        """
        Run one completion.

        Args:
            prompt: Single self-contained user message
            params: Model and decoding parameters
            role: Pipeline role label recorded with the exchange
            trace: Run trace receiving the exchange record

        Returns:
            The metered exchange

        Raises:
            GatewayError: Transport failure after retries, replay miss, provider error
        """
        InputValidator.validate_prompt(prompt)

        reply = await self.provider.chat(prompt, params)
        exchange = LlmExchange(
            role=role,
            prompt=prompt,
            params=params,
            response=reply.text,
            prompt_tokens=reply.prompt_tokens,
            completion_tokens=reply.completion_tokens,
            cost=self.price_table.cost_of(reply.prompt_tokens, reply.completion_tokens),
            retries=reply.retries,
            truncated=reply.truncated,
            fingerprint=params.fingerprint(prompt),
        )

        if exchange.truncated:
            logger.warning("completion_truncated", role=role, fingerprint=exchange.fingerprint)
        if trace is not None:
            await trace.awrite("exchange", **exchange.trace_fields())
            if exchange.truncated:
                await trace.awrite(
                    "warning",
                    message="completion truncated at max_tokens",
                    fingerprint=exchange.fingerprint,
                )
        logger.debug(
            "exchange",
            role=role,
            prompt_tokens=exchange.prompt_tokens,
            completion_tokens=exchange.completion_tokens,
            cost=str(exchange.cost),
        )
        return exchange
