"""Record/replay cassettes for deterministic offline runs."""

import asyncio
import json
from pathlib import Path
from typing import Dict, Optional

from ..utils.logger import get_logger
from .exceptions import GatewayError, ReplayMissError
from .models import LlmParams, ProviderReply
from .providers import ChatProvider

logger = get_logger(__name__)


class Cassette:
    """Map from request fingerprint to recorded reply, backed by ``cassette.jsonl``."""

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else None
        self.entries: Dict[str, ProviderReply] = {}
        self._lock = asyncio.Lock()

    @classmethod
    def load(cls, path: Path) -> "Cassette":
        cassette = cls(path)
        if not cassette.path.exists():
            return cassette
        with cassette.path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    fingerprint = record["fingerprint"]
                    reply = ProviderReply(
                        text=record["response"],
                        prompt_tokens=record.get("prompt_tokens", 0),
                        completion_tokens=record.get("completion_tokens", 0),
                        retries=record.get("retries", 0),
                        truncated=record.get("truncated", False),
                    )
                except (ValueError, KeyError, TypeError) as e:
                    raise GatewayError(
                        f"Malformed cassette record at line {line_no}: {e}",
                        error_code="CASSETTE_FORMAT",
                    ) from e
                cassette.entries.setdefault(fingerprint, reply)
        logger.debug("cassette_loaded", path=str(cassette.path), entries=len(cassette.entries))
        return cassette

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, fingerprint: object) -> bool:
        return fingerprint in self.entries

    def get(self, fingerprint: str) -> Optional[ProviderReply]:
        return self.entries.get(fingerprint)

    async def record(self, fingerprint: str, reply: ProviderReply) -> None:
        """Store a reply; the first recording of a fingerprint wins."""
        async with self._lock:
            if fingerprint in self.entries:
                return
            self.entries[fingerprint] = reply
            if self.path is None:
                return
            self.path.parent.mkdir(parents=True, exist_ok=True)
            line = json.dumps(
                {
                    "fingerprint": fingerprint,
                    "response": reply.text,
                    "prompt_tokens": reply.prompt_tokens,
                    "completion_tokens": reply.completion_tokens,
                    "retries": reply.retries,
                    "truncated": reply.truncated,
                },
                ensure_ascii=False,
            )
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")


class ReplayProvider:
    """Answers from a cassette; unrecorded requests fail in strict mode.

    In non-strict mode a miss is forwarded to ``fallback`` and recorded.
    """

    def __init__(
        self,
        cassette: Cassette,
        strict: bool = True,
        fallback: Optional[ChatProvider] = None,
    ):
        if not strict and fallback is None:
            raise ValueError("Non-strict replay needs a fallback provider")
        self.cassette = cassette
        self.strict = strict
        self.fallback = fallback

    async def chat(self, prompt: str, params: LlmParams) -> ProviderReply:
        fingerprint = params.fingerprint(prompt)
        reply = self.cassette.get(fingerprint)
        if reply is not None:
            return reply.model_copy()
        if self.strict or self.fallback is None:
            logger.error("replay_miss", fingerprint=fingerprint)
            raise ReplayMissError(fingerprint)
        reply = await self.fallback.chat(prompt, params)
        await self.cassette.record(fingerprint, reply)
        return reply


class RecordingProvider:
    """Forwards to a live provider and records every reply."""

    def __init__(self, inner: ChatProvider, cassette: Cassette):
        self.inner = inner
        self.cassette = cassette

    async def chat(self, prompt: str, params: LlmParams) -> ProviderReply:
        reply = await self.inner.chat(prompt, params)
        await self.cassette.record(params.fingerprint(prompt), reply)
        return reply
