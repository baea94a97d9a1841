"""Unit tests for runtime wiring."""
import pytest

from dsagent.cli.config import AppConfig, ConfigError, Secrets
from dsagent.cli.providers import build_runtime
from dsagent.llm_gateway import HttpChatProvider, RecordingProvider, ReplayProvider, ScriptedChatProvider
from dsagent.retrieval import HashingEmbeddingProvider, HttpEmbeddingProvider


def offline_config(**embedding) -> AppConfig:
    return AppConfig.model_validate({"embedding": {"backend": "hashing", "hashing_dim": 16, **embedding}})


class TestBuildRuntime:
    """Test cases for build_runtime."""

    @pytest.mark.asyncio
    async def test_live_http(self):
        runtime = build_runtime(AppConfig(), Secrets(api_key="sk-test"))
        try:
            assert isinstance(runtime.gateway.provider, HttpChatProvider)
            assert isinstance(runtime.embedder.provider, HttpEmbeddingProvider)
            assert len(runtime.clients) == 2
        finally:
            await runtime.aclose()

    @pytest.mark.asyncio
    async def test_offline_embeddings(self):
        runtime = build_runtime(offline_config(), Secrets(), chat_provider=ScriptedChatProvider(["ok"]))
        try:
            assert isinstance(runtime.embedder.provider, HashingEmbeddingProvider)
            assert runtime.clients == []
        finally:
            await runtime.aclose()

    @pytest.mark.asyncio
    async def test_record_wraps_provider(self, tmp_path):
        runtime = build_runtime(
            offline_config(), Secrets(), record=tmp_path / "c.jsonl", chat_provider=ScriptedChatProvider(["ok"])
        )
        try:
            assert isinstance(runtime.gateway.provider, RecordingProvider)
        finally:
            await runtime.aclose()

    @pytest.mark.asyncio
    async def test_replay_from_cassette(self, tmp_path):
        cassette = tmp_path / "c.jsonl"
        cassette.write_text("")
        runtime = build_runtime(offline_config(cache_enabled=False), Secrets(), replay=cassette)
        try:
            assert isinstance(runtime.gateway.provider, ReplayProvider)
            assert runtime.cache is None
        finally:
            await runtime.aclose()

    def test_record_and_replay_conflict(self, tmp_path):
        with pytest.raises(ConfigError):
            build_runtime(offline_config(), Secrets(), record=tmp_path / "a", replay=tmp_path / "b")

    def test_missing_cassette(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            build_runtime(offline_config(), Secrets(), replay=tmp_path / "absent.jsonl")
