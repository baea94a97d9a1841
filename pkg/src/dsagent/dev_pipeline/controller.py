"""Development loop: retrieve, rerank, plan, code, execute, debug, log, retain."""

import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence

from ..case_bank.exceptions import CaseBankError
from ..case_bank.models import Case
from ..case_bank.retain import retain
from ..case_bank.store import CaseBank
from ..executor.analysis import detect_error, is_improvement
from ..executor.artifacts import RunLayout
from ..executor.evaluation import Evaluator
from ..executor.models import ErrorKind, ExecutionResult, SandboxPolicy
from ..executor.sandbox import run_script
from ..executor.task import TaskSpec
from ..llm_gateway.exceptions import GatewayError
from ..llm_gateway.gateway import LlmGateway
from ..llm_gateway.models import LlmExchange, LlmParams
from ..llm_gateway.pricing import total_cost
from ..prompt_kit.diffing import append_log, code_diff
from ..prompt_kit.exceptions import CodeExtractionError
from ..prompt_kit.parsers import RankPermutation, extract_code, parse_permutation, plan_from_reply
from ..prompt_kit.renderers import (
    render_debugger,
    render_logger,
    render_planner,
    render_programmer,
    render_revise_rank,
)
from ..retrieval.embedders import Embedder
from ..retrieval.exceptions import RetrievalError
from ..retrieval.models import ScoredCase
from ..retrieval.similarity import top_k
from ..utils.logger import get_logger
from ..utils.trace import TraceWriter
from .exceptions import PipelineConfigError, ScaffoldError
from .models import DevConfig, DevRunReport, IterationRecord, PipelineMode

logger = get_logger(__name__)

DEFAULT_TIMEOUT = 3600.0
CODE_REMINDER = (
    "\n\nYour previous reply did not contain a ```python code block. "
    "Reply again and put the full code inside a single ```python block."
)


def select_case(
    scored: Sequence[ScoredCase],
    permutation: Optional[RankPermutation],
    mode: PipelineMode,
) -> str:
    """Case id the Planner sees this iteration."""
    if mode is PipelineMode.NO_CBR:
        raise PipelineConfigError("No case is selected when case-based reasoning is disabled")
    if not scored:
        raise PipelineConfigError("No retrieved cases to select from")
    if mode is PipelineMode.NO_REVISERANK or permutation is None:
        return scored[0].case_id
    if permutation.k != len(scored):
        raise ValueError(f"Permutation over {permutation.k} cases, {len(scored)} retrieved")
    return permutation.apply(scored)[0].case_id


def make_run_id(task_name: str) -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")
    return f"{task_name}-{stamp}-{uuid.uuid4().hex[:6]}"


def mechanical_summary(plan: str, result: ExecutionResult) -> str:
    """Log entry used when the Logger exchange fails."""
    status = "timed out" if result.timed_out else f"exited with code {result.exit_code}"
    metric = "no metric" if result.metric is None else f"metric {result.metric!r}"
    return (
        f"[Experiment Summary]: {plan}\n"
        f"[Experiment Result]: The script {status} with {metric}."
    )


class DevelopmentPipeline:
    """One development run of a task against the two case banks."""

    def __init__(
        self,
        task: TaskSpec,
        insight_bank: CaseBank,
        agent_bank: CaseBank,
        config: DevConfig,
        gateway: LlmGateway,
        embedder: Optional[Embedder],
        runs_dir: Path,
        evaluator: Optional[Evaluator] = None,
    ):
        self.task = task
        self.insight_bank = insight_bank
        self.agent_bank = agent_bank
        self.config = config
        self.gateway = gateway
        self.embedder = embedder.scoped() if embedder is not None else None
        self.evaluator = evaluator
        self.direction = config.metric_direction or task.direction
        self.params = LlmParams(
            model=config.model, temperature=config.temperature, max_tokens=config.max_tokens
        )
        self.layout = RunLayout(runs_dir, config.run_id or make_run_id(task.name))
        self.trace: Optional[TraceWriter] = None
        self.exchanges: List[LlmExchange] = []
        self.policy: Optional[SandboxPolicy] = None

    def _check_config(self) -> None:
        if self.config.mode is not PipelineMode.NO_CBR:
            if self.embedder is None:
                raise PipelineConfigError(f"Mode {self.config.mode.value} needs an embedder")
            if len(self.insight_bank) == 0:
                raise PipelineConfigError(
                    f"Mode {self.config.mode.value} needs a non-empty insight bank ({self.insight_bank.path})"
                )

    async def _complete(self, prompt: str, role: str) -> LlmExchange:
        exchange = await self.gateway.complete(prompt, self.params, role=role, trace=self.trace)
        self.exchanges.append(exchange)
        return exchange

    async def _write_code(self, prompt: str, role: str) -> Optional[str]:
        """Ask for code; one re-prompt on a reply without a python block."""
        exchange = await self._complete(prompt, role)
        try:
            return extract_code(exchange.response)
        except CodeExtractionError:
            logger.warning("code_extraction_failed", role=role)
        exchange = await self._complete(prompt + CODE_REMINDER, f"{role}_retry")
        try:
            return extract_code(exchange.response)
        except CodeExtractionError:
            logger.warning("code_extraction_failed_after_retry", role=role)
            return None

    async def _execute(self, script: str) -> ExecutionResult:
        result = await run_script(script, self.policy, self.task.metric_pattern)
        if self.evaluator is not None and not detect_error(result):
            metric = await self.evaluator.evaluate(self.policy, result)
            result = result.model_copy(update={"metric": metric})
        return result

    async def _retrieve(self) -> List[ScoredCase]:
        query = await self.embedder.embed(self.task.description, trace=self.trace)
        scored = top_k(query, self.insight_bank, self.config.k)
        await self.trace.awrite(
            "retrieval",
            case_ids=[s.case_id for s in scored],
            scores=[s.score for s in scored],
        )
        return scored

    def _case_text(self, case_id: str) -> str:
        case: Optional[Case] = self.insight_bank.get(case_id)
        if case is None:
            raise PipelineConfigError(f"Retrieved case {case_id} vanished from the insight bank")
        return case.body

    async def run(self) -> DevRunReport:
        """
        Execute the configured number of iterations.

        Raises:
            PipelineConfigError: Mode needs banks or an embedder that are missing
            ScaffoldError: The task scaffold fails its baseline run
        """
        config = self.config
        self._check_config()

        workspace = self.layout.prepare(self.task.root)
        self.trace = TraceWriter(self.layout.trace_path)
        self.policy = SandboxPolicy(
            workdir=workspace,
            timeout=config.timeout or self.task.settings.timeout or DEFAULT_TIMEOUT,
            interpreter=config.interpreter,
            max_output_bytes=config.max_output_bytes,
            memory_mb=config.memory_mb,
            max_processes=config.max_processes,
        )
        report = DevRunReport(
            run_id=self.layout.run_id,
            task_id=self.task.name,
            mode=config.mode,
            started_at=datetime.now(timezone.utc),
        )

        await self.trace.awrite(
            "run_start",
            stage="development",
            task=self.task.name,
            mode=config.mode.value,
            k=config.k,
            iterations=config.iterations,
            max_debug_attempts=config.max_debug_attempts,
            model=config.model,
            temperature=config.temperature,
            direction=self.direction.value,
        )

        baseline = await run_script(self.task.scaffold, self.policy, self.task.metric_pattern)
        report.baseline = baseline
        await self.trace.awrite("baseline", **baseline.trace_fields())
        if detect_error(baseline):
            raise ScaffoldError(
                f"Scaffold of task {self.task.name} fails its baseline run: {baseline.log_text(500)}",
                exit_code=baseline.exit_code,
            )
        logger.info("development_started", run_id=report.run_id, task=self.task.name, mode=config.mode.value)

        try:
            await self._loop(report)
        except (GatewayError, RetrievalError) as e:
            report.aborted = True
            report.abort_error = f"{type(e).__name__}: {e}"
            await self.trace.awrite("warning", message="run aborted", error=report.abort_error)
            logger.error("development_aborted", run_id=report.run_id, error=report.abort_error)

        report.exchanges = list(self.exchanges)
        report.total_cost = total_cost(self.exchanges)
        if self.embedder is not None:
            report.embedding_calls = self.embedder.calls
        report.finished_at = datetime.now(timezone.utc)
        await self.trace.awrite(
            "run_end",
            records=len(report.records),
            best_metric=report.best_metric,
            success=report.success,
            retained=report.retained_count,
            exchanges=len(report.exchanges),
            total_cost=str(report.total_cost),
            aborted=report.aborted,
        )
        self.layout.write_report(report.to_json_dict())
        logger.info(
            "development_finished",
            run_id=report.run_id,
            best_metric=report.best_metric,
            success=report.success,
            total_cost=str(report.total_cost),
        )
        return report

    async def _loop(self, report: DevRunReport) -> None:
        config = self.config
        use_cbr = config.mode is not PipelineMode.NO_CBR
        scored: List[ScoredCase] = await self._retrieve() if use_cbr else []

        running_log = ""
        last_clean_script = self.task.scaffold
        best_metric: Optional[float] = None

        for step in range(1, config.iterations + 1):
            permutation: Optional[RankPermutation] = None
            selected_id: Optional[str] = None
            case_text: Optional[str] = None

            if config.mode is PipelineMode.FULL:
                prompt = render_revise_rank(
                    self.task.description, running_log, [self._case_text(s.case_id) for s in scored]
                )
                exchange = await self._complete(prompt, "revise_rank")
                permutation = parse_permutation(exchange.response, len(scored))
                await self.trace.awrite("permutation", step=step, order=permutation.order)
            if use_cbr:
                selected_id = select_case(scored, permutation, config.mode)
                case_text = self._case_text(selected_id)
                await self.trace.awrite("selection", step=step, case_id=selected_id)

            exchange = await self._complete(
                render_planner(self.task.description, running_log, last_clean_script, case_text),
                "planner",
            )
            plan = plan_from_reply(exchange.response)
            await self.trace.awrite("plan", step=step, decision=plan.decision, degraded=plan.degraded)
            if plan.degraded:
                await self.trace.awrite("warning", step=step, message="planner reply has no [Decision] section")

            failure: Optional[str] = None
            debug_attempts = 0
            script = await self._write_code(render_programmer(last_clean_script, plan.decision), "programmer")
            if script is None:
                failure = "programmer reply contained no python code block"
                script = ""
                result = ExecutionResult.failure(failure, ErrorKind.INCOMPLETE_PROGRAM)
            else:
                result = await self._execute(script)
                remind = False
                # every debugger exchange, reminder included, spends one attempt
                while detect_error(result) and debug_attempts < config.max_debug_attempts:
                    debug_attempts += 1
                    prompt = render_debugger(
                        last_clean_script, plan.decision, script, result.log_text(config.max_log_chars)
                    )
                    exchange = await self._complete(
                        prompt + CODE_REMINDER if remind else prompt,
                        "debugger_retry" if remind else "debugger",
                    )
                    try:
                        script = extract_code(exchange.response)
                    except CodeExtractionError:
                        logger.warning("code_extraction_failed", role="debugger", attempt=debug_attempts)
                        remind = True
                        continue
                    remind = False
                    result = await self._execute(script)

            await self.trace.awrite(
                "execution", step=step, debug_attempts=debug_attempts, **result.trace_fields()
            )
            self.layout.write_step(
                step, script, result, plan=plan.full_response, extra={"debug_attempts": debug_attempts}
            )

            clean = not detect_error(result)
            improved = clean and is_improvement(result.metric, best_metric, self.direction)
            retained_ids: List[str] = []
            if improved:
                best_metric = result.metric
                report.best_metric = best_metric
                report.best_script = script
                if use_cbr:
                    retained_ids = await self._retain(step, script, result.metric)

            diff = code_diff(last_clean_script, script) if clean else ""
            previous_log = running_log
            running_log = append_log(
                running_log,
                await self._summarise(plan.decision, result, diff, previous_log, step),
                step,
            )
            await self.trace.awrite("log", step=step, running_log=running_log)
            if clean:
                last_clean_script = script

            report.records.append(
                IterationRecord(
                    step=step,
                    permutation=permutation,
                    selected_case_id=selected_id,
                    plan=plan,
                    script=script,
                    debug_attempts=debug_attempts,
                    result=result,
                    log_after=running_log,
                    improved=improved,
                    retained=bool(retained_ids),
                    best_metric=best_metric,
                    retained_ids=retained_ids,
                    failure=failure,
                )
            )
            logger.info(
                "iteration_finished",
                step=step,
                exit_code=result.exit_code,
                metric=result.metric,
                debug_attempts=debug_attempts,
                improved=improved,
                best_metric=best_metric,
            )

    async def _retain(self, step: int, script: str, metric: Optional[float]) -> List[str]:
        try:
            insight_id, agent_id = await retain(
                self.insight_bank,
                self.agent_bank,
                self.task.description,
                script,
                self.embedder,
                scaffold=self.task.scaffold,
                modality=self.task.modality,
                source=f"run:{self.layout.run_id}",
                trace=self.trace,
            )
        except (CaseBankError, RetrievalError) as e:
            await self.trace.awrite("warning", step=step, message="retain failed", error=e.message)
            logger.warning("retain_failed", step=step, error=e.message)
            return []
        await self.trace.awrite("retain", step=step, metric=metric, insight_id=insight_id, agent_id=agent_id)
        return [insight_id, agent_id]

    async def _summarise(
        self, plan: str, result: ExecutionResult, diff: str, running_log: str, step: int
    ) -> str:
        prompt = render_logger(plan, result.log_text(self.config.max_log_chars), diff, running_log)
        try:
            exchange = await self._complete(prompt, "logger")
        except GatewayError as e:
            await self.trace.awrite("warning", step=step, message="logger failed", error=e.message)
            logger.warning("logger_failed", step=step, error=e.message)
            return mechanical_summary(plan, result)
        return exchange.response


async def run_development(
    task: TaskSpec,
    insight_bank: CaseBank,
    agent_bank: CaseBank,
    config: DevConfig,
    gateway: LlmGateway,
    embedder: Optional[Embedder],
    runs_dir: Path,
    evaluator: Optional[Evaluator] = None,
) -> DevRunReport:
    """Run the development stage of ``task``; see DevelopmentPipeline."""
    pipeline = DevelopmentPipeline(
        task, insight_bank, agent_bank, config, gateway, embedder, runs_dir, evaluator
    )
    return await pipeline.run()
