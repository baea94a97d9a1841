"""Integration tests for the development loop with a scripted model."""
import json

import pytest
import pytest_asyncio

from dsagent.case_bank import CaseBank
from dsagent.dev_pipeline import DevConfig, PipelineConfigError, PipelineMode, ScaffoldError, run_development
from dsagent.executor import load_task
from dsagent.llm_gateway import (
    Cassette,
    GatewayError,
    LlmGateway,
    RecordingProvider,
    ReplayProvider,
    ScriptedChatProvider,
)
from dsagent.retrieval import Embedder, HashingEmbeddingProvider
from dsagent.utils.trace import read_trace

from tests.fixtures.agent import BUGGY_CODE, EMBED_DIM, ScriptedAgent, seed_insight_bank
from tests.fixtures.tasks import make_task_dir, metric_script

pytestmark = [pytest.mark.integration, pytest.mark.slow]

METRICS = [5.0, 4.0, 4.5, 3.0, 3.5]


def dev_config(**overrides) -> DevConfig:
    values = dict(k=3, iterations=5, max_debug_attempts=2, timeout=60, run_id="run-1")
    values.update(overrides)
    return DevConfig(**values)


@pytest.fixture
def task(tmp_path):
    return load_task(make_task_dir(tmp_path / "tasks", scaffold=metric_script(6.0)))


@pytest_asyncio.fixture
async def banks(tmp_path):
    insight = await seed_insight_bank(tmp_path / "banks" / "insight")
    agent = CaseBank.open(tmp_path / "banks" / "agent")
    return insight, agent


def embedder() -> Embedder:
    return Embedder(HashingEmbeddingProvider(dim=EMBED_DIM))


class TestDevelopmentModes:
    """Test cases for the full loop and its ablations."""

    @pytest.mark.asyncio
    async def test_full_mode(self, task, banks, tmp_path):
        insight, agent = banks
        model = ScriptedAgent(METRICS, ranking="[2] > [1] > [3]")

        report = await run_development(
            task, insight, agent, dev_config(), LlmGateway(ScriptedChatProvider(model)), embedder(), tmp_path / "runs"
        )

        assert report.aborted is False
        assert [r.retained for r in report.records] == [True, True, False, True, False]
        assert [r.improved for r in report.records] == [True, True, False, True, False]
        assert report.best_metric == 3.0
        assert report.best_script == metric_script(3.0)
        assert report.exchange_counts() == {"revise_rank": 5, "planner": 5, "programmer": 5, "logger": 5}
        # one retrieval query plus one embedding per retained solution
        assert report.embedding_calls == 4
        assert len(agent) == 3
        assert len(CaseBank.load(tmp_path / "banks" / "insight")) == 6

        trace = read_trace(tmp_path / "runs" / "run-1" / "trace.jsonl")
        retrieved = trace_of(trace, "retrieval")[0]["case_ids"]
        assert len(retrieved) == 3
        assert {r.selected_case_id for r in report.records} == {retrieved[1]}
        assert all(r.permutation.order == [2, 1, 3] for r in report.records)

    @pytest.mark.asyncio
    async def test_no_reviserank_takes_top_case(self, task, banks, tmp_path):
        insight, agent = banks
        model = ScriptedAgent(METRICS)

        report = await run_development(
            task,
            insight,
            agent,
            dev_config(mode=PipelineMode.NO_REVISERANK),
            LlmGateway(ScriptedChatProvider(model)),
            embedder(),
            tmp_path / "runs",
        )

        trace = read_trace(tmp_path / "runs" / "run-1" / "trace.jsonl")
        top = trace_of(trace, "retrieval")[0]["case_ids"][0]
        assert "revise_rank" not in report.exchange_counts()
        assert all(r.selected_case_id == top for r in report.records)
        assert all(r.permutation is None for r in report.records)
        assert report.retained_count == 3

    @pytest.mark.asyncio
    async def test_no_cbr_touches_no_bank(self, task, tmp_path):
        insight = CaseBank.open(tmp_path / "banks" / "insight")
        agent = CaseBank.open(tmp_path / "banks" / "agent")
        model = ScriptedAgent(METRICS)

        report = await run_development(
            task,
            insight,
            agent,
            dev_config(mode=PipelineMode.NO_CBR),
            LlmGateway(ScriptedChatProvider(model)),
            None,
            tmp_path / "runs",
        )

        assert report.embedding_calls == 0
        assert report.retained_count == 0
        assert [r.improved for r in report.records] == [True, True, False, True, False]
        assert all(r.selected_case_id is None for r in report.records)
        assert set(report.exchange_counts()) == {"planner", "programmer", "logger"}
        assert not (tmp_path / "banks" / "agent" / "cases.jsonl").exists()
        assert "``` Case:" not in model_prompts_of(report, "planner")[0]

    @pytest.mark.asyncio
    async def test_cbr_needs_insight_cases(self, task, tmp_path):
        empty = CaseBank.open(tmp_path / "banks" / "insight")
        agent = CaseBank.open(tmp_path / "banks" / "agent")

        with pytest.raises(PipelineConfigError):
            await run_development(
                task,
                empty,
                agent,
                dev_config(),
                LlmGateway(ScriptedChatProvider(ScriptedAgent(METRICS))),
                embedder(),
                tmp_path / "runs",
            )


class TestDebugging:
    """Test cases for the debug rounds."""

    @pytest.mark.asyncio
    async def test_debugger_repairs_step(self, task, banks, tmp_path):
        insight, agent = banks
        model = ScriptedAgent(METRICS[:2], buggy_steps={1})

        report = await run_development(
            task,
            insight,
            agent,
            dev_config(iterations=2),
            LlmGateway(ScriptedChatProvider(model)),
            embedder(),
            tmp_path / "runs",
        )

        first = report.records[0]
        assert first.debug_attempts == 1
        assert first.has_error is False
        assert first.result.metric == 5.0
        assert report.exchange_counts()["debugger"] == 1

    @pytest.mark.asyncio
    async def test_debug_rounds_are_bounded(self, task, banks, tmp_path):
        insight, agent = banks
        model = ScriptedAgent(METRICS[:1], buggy_steps={1}, debugger_fixes=False)

        report = await run_development(
            task,
            insight,
            agent,
            dev_config(iterations=1, max_debug_attempts=2),
            LlmGateway(ScriptedChatProvider(model)),
            embedder(),
            tmp_path / "runs",
        )

        record = report.records[0]
        assert record.debug_attempts == 2
        assert record.has_error is True
        assert record.retained is False
        assert report.success is False
        assert len(agent) == 0
        assert report.exchange_counts()["debugger"] == 2

    @pytest.mark.asyncio
    async def test_reminders_spend_debug_attempts(self, task, banks, tmp_path):
        insight, agent = banks
        model = ScriptedAgent(METRICS[:1], buggy_steps={1}, debugger_reply="The bug is on line one.")

        report = await run_development(
            task,
            insight,
            agent,
            dev_config(iterations=1, max_debug_attempts=2),
            LlmGateway(ScriptedChatProvider(model)),
            embedder(),
            tmp_path / "runs",
        )

        counts = report.exchange_counts()
        assert report.records[0].debug_attempts == 2
        assert counts["debugger"] == 1
        assert counts["debugger_retry"] == 1
        assert len(report.exchanges) == 3 + 2 + 1
        assert report.records[0].script == BUGGY_CODE


class TestRunArtifacts:
    """Test cases for what a run leaves on disk."""

    @pytest.mark.asyncio
    async def test_step_files_and_report(self, task, banks, tmp_path):
        insight, agent = banks

        report = await run_development(
            task,
            insight,
            agent,
            dev_config(iterations=2),
            LlmGateway(ScriptedChatProvider(ScriptedAgent(METRICS))),
            embedder(),
            tmp_path / "runs",
        )

        run_dir = tmp_path / "runs" / "run-1"
        assert (run_dir / "step_1" / "script.py").read_text() == metric_script(5.0)
        assert "[Decision]" in (run_dir / "step_2" / "plan.md").read_text()
        saved = json.loads((run_dir / "report.json").read_text())
        assert saved["run_id"] == report.run_id
        assert saved["best_metric"] == 4.0
        assert saved["retained_count"] == 2
        types = [r["type"] for r in read_trace(run_dir / "trace.jsonl")]
        assert types[0] == "run_start"
        assert types[-1] == "run_end"
        assert "baseline" in types

    @pytest.mark.asyncio
    async def test_failing_scaffold(self, banks, tmp_path):
        insight, agent = banks
        broken = load_task(make_task_dir(tmp_path / "tasks", scaffold="raise SystemExit(1)\n"))

        with pytest.raises(ScaffoldError):
            await run_development(
                broken,
                insight,
                agent,
                dev_config(),
                LlmGateway(ScriptedChatProvider(ScriptedAgent(METRICS))),
                embedder(),
                tmp_path / "runs",
            )

    @pytest.mark.asyncio
    async def test_gateway_error_aborts_with_partial_report(self, task, banks, tmp_path):
        insight, agent = banks
        model = ScriptedAgent(METRICS, fail_on={"planner:2": GatewayError("provider down", error_code="DOWN")})

        report = await run_development(
            task, insight, agent, dev_config(), LlmGateway(ScriptedChatProvider(model)), embedder(), tmp_path / "runs"
        )

        assert report.aborted is True
        assert "provider down" in report.abort_error
        assert len(report.records) == 1
        saved = json.loads((tmp_path / "runs" / "run-1" / "report.json").read_text())
        assert saved["aborted"] is True
        assert len(saved["records"]) == 1

    @pytest.mark.asyncio
    async def test_logger_failure_falls_back(self, task, banks, tmp_path):
        insight, agent = banks
        model = ScriptedAgent(METRICS[:1], fail_on={"logger:1": GatewayError("busy")})

        report = await run_development(
            task,
            insight,
            agent,
            dev_config(iterations=1),
            LlmGateway(ScriptedChatProvider(model)),
            embedder(),
            tmp_path / "runs",
        )

        assert report.aborted is False
        assert "[Experiment Result]: The script exited with code 0 with metric 5.0." in report.records[0].log_after


class TestReplay:
    """Test cases for deterministic record/replay."""

    @pytest.mark.asyncio
    async def test_replayed_run_has_identical_trace(self, tmp_path):
        cassette = tmp_path / "cassette.jsonl"

        async def run(name, provider):
            root = tmp_path / name
            task = load_task(make_task_dir(root / "tasks", scaffold=metric_script(6.0)))
            insight = await seed_insight_bank(root / "banks" / "insight")
            agent = CaseBank.open(root / "banks" / "agent")
            await run_development(
                task, insight, agent, dev_config(iterations=3), LlmGateway(provider), embedder(), root / "runs"
            )
            return (root / "runs" / "run-1" / "trace.jsonl").read_bytes()

        recorded = await run("live", RecordingProvider(ScriptedChatProvider(ScriptedAgent(METRICS)), Cassette.load(cassette)))
        replayed = await run("replay", ReplayProvider(Cassette.load(cassette), strict=True))

        assert len(Cassette.load(cassette)) > 0
        assert replayed == recorded

    @pytest.mark.asyncio
    async def test_replay_with_debug_step_under_new_run_root(self, tmp_path):
        cassette = tmp_path / "cassette.jsonl"

        async def run(name, run_id, provider):
            root = tmp_path / name
            task = load_task(make_task_dir(root / "tasks", scaffold=metric_script(6.0)))
            insight = await seed_insight_bank(root / "banks" / "insight")
            agent = CaseBank.open(root / "banks" / "agent")
            report = await run_development(
                task,
                insight,
                agent,
                dev_config(iterations=2, run_id=run_id),
                LlmGateway(provider),
                embedder(),
                root / "runs",
            )
            return report, (root / "runs" / run_id / "trace.jsonl").read_bytes()

        scripted = ScriptedChatProvider(ScriptedAgent(METRICS, buggy_steps={1}))
        live = RecordingProvider(scripted, Cassette.load(cassette))
        recorded_report, recorded = await run("live", "smoker-live", live)
        replayed_report, replayed = await run(
            "replay", "smoker-replay", ReplayProvider(Cassette.load(cassette), strict=True)
        )

        assert recorded_report.records[0].debug_attempts == 1
        assert "NameError" in model_prompts_of(recorded_report, "debugger")[0]
        assert replayed_report.aborted is False
        assert replayed == recorded


class FailingAfterFirstEmbedding(HashingEmbeddingProvider):
    """Hashing embeddings whose service goes down after the retrieval query."""

    def __init__(self):
        super().__init__(dim=EMBED_DIM)
        self.requests = 0

    async def embed_raw(self, text):
        self.requests += 1
        if self.requests > 1:
            raise GatewayError("embedding service down")
        return await super().embed_raw(text)


class TestRetain:
    """Test cases for archiving improved steps."""

    @pytest.mark.asyncio
    async def test_embedding_failure_keeps_the_run_going(self, task, banks, tmp_path):
        insight, agent = banks

        report = await run_development(
            task,
            insight,
            agent,
            dev_config(iterations=2),
            LlmGateway(ScriptedChatProvider(ScriptedAgent(METRICS[:2]))),
            Embedder(FailingAfterFirstEmbedding()),
            tmp_path / "runs",
        )

        assert report.aborted is False
        assert len(report.records) == 2
        assert report.records[0].improved is True
        assert report.records[0].retained is False
        assert report.best_metric == 4.0
        assert len(agent) == 0
        records = read_trace(tmp_path / "runs" / "run-1" / "trace.jsonl")
        warnings = [r for r in trace_of(records, "warning") if r["message"] == "retain failed"]
        assert len(warnings) == 2
        assert "embedding service down" in warnings[0]["error"]


def trace_of(records, record_type):
    return [r for r in records if r["type"] == record_type]


def model_prompts_of(report, role):
    return [e.prompt for e in report.exchanges if e.role == role]
