"""Provider protocol and the offline scripted provider."""

from typing import Callable, Iterator, List, Protocol, Sequence, Union

from .exceptions import GatewayError
from .models import LlmParams, ProviderReply

ScriptedResponse = Union[str, Exception]
Responder = Callable[[str], ScriptedResponse]


class ChatProvider(Protocol):
    """Anything that turns one user prompt into one reply."""

    async def chat(self, prompt: str, params: LlmParams) -> ProviderReply:
        ...


def estimate_tokens(text: str) -> int:
    """Whitespace token estimate used when no provider usage is available."""
    return len(text.split())


class ScriptedChatProvider:
    """Deterministic provider answering from a script.

    The script is either a sequence consumed in order or a callable mapping
    the prompt to a reply. A scripted ``Exception`` is raised instead of
    returned.
    """

    def __init__(self, script: Union[Sequence[ScriptedResponse], Responder]):
        self._responder: Responder
        if callable(script):
            self._responder = script
        else:
            replies: Iterator[ScriptedResponse] = iter(list(script))

            def _next(_: str) -> ScriptedResponse:
                try:
                    return next(replies)
                except StopIteration:
                    raise GatewayError("Scripted provider ran out of replies", error_code="SCRIPT_EXHAUSTED")

            self._responder = _next
        self.prompts: List[str] = []

    async def chat(self, prompt: str, params: LlmParams) -> ProviderReply:
        self.prompts.append(prompt)
        reply = self._responder(prompt)
        if isinstance(reply, Exception):
            raise reply
        return ProviderReply(
            text=reply,
            prompt_tokens=estimate_tokens(prompt),
            completion_tokens=estimate_tokens(reply),
        )
