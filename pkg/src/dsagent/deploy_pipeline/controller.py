"""Deployment: adapt the closest past solution to a new task in one call."""

import asyncio
import json
import random
from collections import Counter
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path
from typing import List, Optional, Sequence

from ..case_bank.models import Case, CaseKind
from ..case_bank.store import CaseBank
from ..dev_pipeline.controller import CODE_REMINDER, DEFAULT_TIMEOUT, make_run_id
from ..dev_pipeline.exceptions import PipelineConfigError
from ..executor.analysis import detect_error
from ..executor.artifacts import RunLayout
from ..executor.models import ErrorKind, ExecutionResult, SandboxPolicy
from ..executor.sandbox import run_script
from ..executor.task import TaskSpec
from ..llm_gateway.exceptions import GatewayError
from ..llm_gateway.gateway import LlmGateway
from ..llm_gateway.models import LlmExchange, LlmParams
from ..llm_gateway.pricing import total_cost
from ..prompt_kit.exceptions import CodeExtractionError
from ..prompt_kit.parsers import extract_code
from ..prompt_kit.renderers import AdapterExample, render_adapter
from ..retrieval.embedders import Embedder
from ..retrieval.exceptions import EmptyBankError, RetrievalError, WrongBankError
from ..retrieval.similarity import retrieve_best_pair, top_k
from ..utils.logger import get_logger
from ..utils.trace import TraceWriter
from .models import DeployConfig, DeployReport, DeploySelection, DeploySummary, DeployTaskSummary

logger = get_logger(__name__)

SUMMARY_FILE = "deploy_summary.json"


def solution_view(bank: CaseBank, allow_mixed: bool) -> CaseBank:
    """The bank restricted to solution cases when mixing is allowed."""
    if not allow_mixed or all(c.kind is CaseKind.SOLUTION for c in bank.cases):
        return bank
    return CaseBank(bank.path, [c for c in bank.cases if c.kind is CaseKind.SOLUTION])


def to_example(case: Case) -> AdapterExample:
    return AdapterExample(task=case.task_desc, scaffold=case.scaffold or case.body, solution=case.body)


class DeploymentPipeline:
    """Single-trial solution of one task."""

    def __init__(
        self,
        task: TaskSpec,
        agent_bank: CaseBank,
        config: DeployConfig,
        gateway: LlmGateway,
        embedder: Optional[Embedder],
        runs_dir: Path,
    ):
        self.task = task
        self.bank = solution_view(agent_bank, config.allow_mixed_bank)
        self.config = config
        self.gateway = gateway
        self.embedder = embedder.scoped() if embedder is not None else None
        self.params = LlmParams(model=config.model, temperature=config.temperature, max_tokens=config.max_tokens)
        self.layout = RunLayout(runs_dir, config.run_id or make_run_id(task.name))
        self.trace: Optional[TraceWriter] = None
        self.exchanges: List[LlmExchange] = []

    def _check_config(self) -> None:
        if self.config.selection is DeploySelection.NONE:
            return
        if len(self.bank) == 0:
            raise EmptyBankError(f"Selection {self.config.selection.value} needs a non-empty bank ({self.bank.path})")
        if any(c.kind is not CaseKind.SOLUTION for c in self.bank.cases):
            raise WrongBankError(f"Bank {self.bank.path} holds non-solution cases")
        if self.config.selection is DeploySelection.RETRIEVED and self.embedder is None:
            raise PipelineConfigError("Retrieved selection needs an embedder")
        if self.config.selection is DeploySelection.RANDOM and self.config.rng_seed is None:
            logger.warning("random_selection_unseeded", task=self.task.name)

    async def _select(self) -> List[Case]:
        config = self.config
        n = min(config.n_examples, len(self.bank))
        if config.selection is DeploySelection.NONE:
            return []
        if config.selection is DeploySelection.RANDOM:
            rng = random.Random(config.rng_seed)
            return rng.sample(self.bank.cases, n)
        if n == 1:
            return [await retrieve_best_pair(self.task.description, self.bank, self.embedder, trace=self.trace)]
        query = await self.embedder.embed(self.task.description, trace=self.trace)
        return [self.bank.cases[s.index] for s in top_k(query, self.bank, n)]

    async def _complete(self, prompt: str, role: str) -> LlmExchange:
        exchange = await self.gateway.complete(prompt, self.params, role=role, trace=self.trace)
        self.exchanges.append(exchange)
        return exchange

    async def run(self) -> DeployReport:
        """
        Select examples, adapt once, execute once.

        Raises:
            EmptyBankError: Example selection over an empty bank
            WrongBankError: Bank holds insight cases and mixing is not allowed
            PipelineConfigError: Retrieved selection without an embedder
        """
        config = self.config
        self._check_config()
        workspace = self.layout.prepare(self.task.root)
        self.trace = TraceWriter(self.layout.trace_path)
        policy = SandboxPolicy(
            workdir=workspace,
            timeout=config.timeout or self.task.settings.timeout or DEFAULT_TIMEOUT,
            interpreter=config.interpreter,
            max_output_bytes=config.max_output_bytes,
            memory_mb=config.memory_mb,
            max_processes=config.max_processes,
        )
        started = datetime.now(timezone.utc)
        await self.trace.awrite(
            "run_start",
            stage="deployment",
            task=self.task.name,
            selection=config.selection.value,
            n_examples=config.n_examples,
            model=config.model,
            temperature=config.temperature,
            rng_seed=config.rng_seed,
        )

        selected: List[Case] = []
        script = ""
        aborted, abort_error = False, None
        try:
            selected = await self._select()
            await self.trace.awrite("selection", case_ids=[c.id for c in selected])
            prompt = render_adapter([to_example(c) for c in selected], self.task.description, self.task.scaffold)
            script = await self._adapt(prompt)
            if script is None:
                script = ""
                result = ExecutionResult.failure(
                    "adapter reply contained no python code block", ErrorKind.INCOMPLETE_PROGRAM
                )
            else:
                result = await run_script(script, policy, self.task.metric_pattern)
        except (GatewayError, RetrievalError) as e:
            aborted, abort_error = True, f"{type(e).__name__}: {e}"
            result = ExecutionResult.failure(abort_error)
            await self.trace.awrite("warning", message="run aborted", error=abort_error)
            logger.error("deployment_aborted", task=self.task.name, error=abort_error)

        await self.trace.awrite("execution", step=1, debug_attempts=0, **result.trace_fields())
        self.layout.write_step(1, script, result, extra={"selected_case_ids": [c.id for c in selected]})

        report = DeployReport(
            run_id=self.layout.run_id,
            task_id=self.task.name,
            selection=config.selection,
            selected_case_ids=[c.id for c in selected],
            script=script,
            result=result,
            one_pass=not result.synthetic and not detect_error(result),
            exchanges=list(self.exchanges),
            total_cost=total_cost(self.exchanges),
            embedding_calls=self.embedder.calls if self.embedder is not None else 0,
            aborted=aborted,
            abort_error=abort_error,
            started_at=started,
            finished_at=datetime.now(timezone.utc),
        )
        await self.trace.awrite(
            "run_end",
            one_pass=report.one_pass,
            metric=result.metric,
            exchanges=len(report.exchanges),
            total_cost=str(report.total_cost),
            aborted=aborted,
        )
        self.layout.write_report(report.to_json_dict())
        logger.info(
            "deployment_finished",
            task=self.task.name,
            one_pass=report.one_pass,
            metric=result.metric,
            selected=report.selected_case_ids,
        )
        return report

    async def _adapt(self, prompt: str) -> Optional[str]:
        exchange = await self._complete(prompt, "adapter")
        try:
            return extract_code(exchange.response)
        except CodeExtractionError:
            logger.warning("code_extraction_failed", role="adapter")
        exchange = await self._complete(prompt + CODE_REMINDER, "adapter_retry")
        try:
            return extract_code(exchange.response)
        except CodeExtractionError:
            return None


async def run_deployment(
    task: TaskSpec,
    agent_bank: CaseBank,
    config: DeployConfig,
    gateway: LlmGateway,
    embedder: Optional[Embedder],
    runs_dir: Path,
) -> DeployReport:
    """Deploy ``task`` once; the bank is only read."""
    return await DeploymentPipeline(task, agent_bank, config, gateway, embedder, runs_dir).run()


def summarise(entries: Sequence[DeployTaskSummary]) -> DeploySummary:
    counts = Counter(e.error_kind for e in entries if e.error_kind and e.error_kind != ErrorKind.NONE.value)
    return DeploySummary(
        tasks=list(entries),
        one_pass_rate=(sum(1 for e in entries if e.one_pass) / len(entries)) if entries else 0.0,
        total_cost=sum((e.cost for e in entries), Decimal("0")),
        error_kind_counts=dict(sorted(counts.items())),
    )


async def batch_deploy(
    tasks: Sequence[TaskSpec],
    agent_bank: CaseBank,
    config: DeployConfig,
    gateway: LlmGateway,
    embedder: Optional[Embedder],
    runs_dir: Path,
    concurrency: int = 1,
) -> DeploySummary:
    """
    Deploy every task and write ``deploy_summary.json`` under ``runs_dir``.

    A task that fails to deploy counts as not one-pass; the batch continues.
    """
    if not tasks:
        raise PipelineConfigError("batch_deploy needs at least one task")
    base_id = config.run_id or make_run_id("batch")
    semaphore = asyncio.Semaphore(max(1, concurrency))

    async def deploy_one(index: int, task: TaskSpec) -> DeployTaskSummary:
        task_config = config.model_copy(update={"run_id": f"{base_id}-{index:03d}-{task.name}"})
        async with semaphore:
            try:
                report = await run_deployment(task, agent_bank, task_config, gateway, embedder, runs_dir)
            except Exception as e:
                logger.error("batch_task_failed", task=task.name, error=str(e))
                return DeployTaskSummary(task_id=task.name, error=f"{type(e).__name__}: {e}")
        return DeployTaskSummary(
            task_id=task.name,
            run_id=report.run_id,
            one_pass=report.one_pass,
            metric=report.result.metric,
            cost=report.total_cost,
            embedding_calls=report.embedding_calls,
            selected_case_ids=report.selected_case_ids,
            error_kind=report.result.error_kind.value,
            error=report.abort_error,
        )

    entries = await asyncio.gather(*(deploy_one(i, t) for i, t in enumerate(tasks, start=1)))
    summary = summarise(entries)
    path = Path(runs_dir) / SUMMARY_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary.model_dump(mode="json"), indent=2, sort_keys=True), encoding="utf-8")
    logger.info("batch_finished", tasks=len(entries), one_pass_rate=summary.one_pass_rate)
    return summary
