"""
``ds`` command line: ingest, develop, deploy and bank inspection.

Exit codes: 0 success, 1 task failure, 2 configuration error, 3 provider error.
"""

import argparse
import asyncio
import sys
from pathlib import Path
from typing import Awaitable, Callable, Optional, Sequence

from ..case_bank.exceptions import CaseBankError
from ..case_bank.models import Modality
from ..case_bank.store import CaseBank
from ..deploy_pipeline.controller import batch_deploy, run_deployment
from ..deploy_pipeline.models import DeploySelection
from ..dev_pipeline.controller import run_development
from ..dev_pipeline.exceptions import PipelineError
from ..dev_pipeline.models import DevRunReport, PipelineMode
from ..executor.evaluation import CommandEvaluator
from ..executor.exceptions import ExecutorError
from ..executor.models import MetricDirection
from ..executor.task import SETTINGS_FILE, TaskSpec, load_task
from ..llm_gateway.exceptions import GatewayError
from ..llm_gateway.models import LlmParams
from ..prompt_kit.exceptions import PromptKitError
from ..retrieval.exceptions import EmbeddingError, RetrievalError
from ..utils.logger import get_logger, setup_logging
from .bank_view import render_case, render_list, render_stats
from .config import AppConfig, ConfigError, Secrets, load_config
from .ingest import ingest_directory
from .providers import Runtime, build_runtime

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_TASK_FAILED = 1
EXIT_CONFIG = 2
EXIT_PROVIDER = 3



def progress(message: str) -> None:
    print(message, file=sys.stderr, flush=True)


def _fmt_metric(value: Optional[float]) -> str:
    return "-" if value is None else repr(value)


def load_task_with_defaults(path: Path, cfg: AppConfig) -> TaskSpec:
    """Load a task; config-level defaults apply only when it has no task.yaml."""
    task = load_task(path)
    if (Path(path) / SETTINGS_FILE).exists():
        return task
    updates = {}
    if cfg.tasks.direction is not None:
        updates["direction"] = cfg.tasks.direction
    if cfg.tasks.metric_pattern is not None:
        updates["metric_pattern"] = cfg.tasks.metric_pattern
    if not updates:
        return task
    return task.model_copy(update={"settings": task.settings.model_copy(update=updates)})


async def _with_runtime(
    cfg: AppConfig,
    body: Callable[[Runtime], Awaitable[int]],
    record: Optional[Path] = None,
    replay: Optional[Path] = None,
) -> int:
    runtime = build_runtime(cfg, Secrets(), record=record, replay=replay)
    try:
        return await body(runtime)
    finally:
        await runtime.aclose()


def cmd_ingest(args: argparse.Namespace, cfg: AppConfig) -> int:
    reports_dir = Path(args.reports_dir)
    if not reports_dir.is_dir():
        raise ConfigError(f"Reports directory not found: {reports_dir}")
    bank = CaseBank.open(Path(args.bank) if args.bank else cfg.banks.insight)
    params = LlmParams(model=cfg.provider.chat_model, temperature=0.0, max_tokens=cfg.provider.max_tokens)

    async def body(runtime: Runtime) -> int:
        report = await ingest_directory(
            reports_dir,
            bank,
            runtime.embedder,
            runtime.gateway,
            params,
            summarize=args.summarize,
            modality=Modality(args.modality),
        )
        for added in report.added:
            flag = " (truncated)" if added.truncated else ""
            print(f"added {added.case_id}  {added.source}  cost={added.cost}{flag}")
        for line in report.skipped:
            progress(f"skipped {line}")
        for line in report.rejected:
            progress(f"rejected {line}")
        progress(
            f"ingested {len(report.added)} case(s), {report.exchanges} exchange(s), total cost {report.total_cost}"
        )
        return EXIT_TASK_FAILED if report.rejected else EXIT_OK

    return asyncio.run(_with_runtime(cfg, body))


def _print_dev_report(report: DevRunReport) -> None:
    for record in report.records:
        progress(
            f"step {record.step}: case={record.selected_case_id or '-'} "
            f"debug={record.debug_attempts} metric={_fmt_metric(record.result.metric)} "
            f"retained={'yes' if record.retained else 'no'}"
        )
    if report.aborted:
        progress(f"aborted: {report.abort_error}")
    progress(
        f"best metric {_fmt_metric(report.best_metric)}, retained {report.retained_count}, "
        f"cost {report.total_cost}"
    )


def cmd_develop(args: argparse.Namespace, cfg: AppConfig) -> int:
    task = load_task_with_defaults(Path(args.task_dir), cfg)
    mode = PipelineMode(args.mode.replace("-", "_")) if args.mode else cfg.development.mode
    config = cfg.dev_config(
        mode=mode,
        iterations=args.iterations,
        k=args.k,
        max_debug_attempts=args.debug_attempts,
        metric_direction=MetricDirection(args.direction) if args.direction else None,
        run_id=args.run_id,
        timeout=task.settings.timeout,
    )
    insight_bank = CaseBank.open(cfg.banks.insight)
    agent_bank = CaseBank.open(cfg.banks.agent)
    evaluator = (
        CommandEvaluator(task.settings.evaluator, task.settings.evaluator_pattern)
        if task.settings.evaluator
        else None
    )
    if mode is PipelineMode.NO_CBR:
        progress("cases: none")
    else:
        progress(f"cases: {len(insight_bank)} in {insight_bank.path}")

    async def body(runtime: Runtime) -> int:
        embedder = None if mode is PipelineMode.NO_CBR else runtime.embedder
        report = await run_development(
            task, insight_bank, agent_bank, config, runtime.gateway, embedder, cfg.runs_dir, evaluator
        )
        _print_dev_report(report)
        print(Path(cfg.runs_dir) / report.run_id / "report.json")
        if report.aborted:
            return EXIT_PROVIDER
        return EXIT_OK if report.success else EXIT_TASK_FAILED

    return asyncio.run(_with_runtime(cfg, body, record=args.record, replay=args.replay))


def _deploy_selection(args: argparse.Namespace, cfg: AppConfig) -> dict:
    if args.zero_shot:
        return {"selection": DeploySelection.NONE, "n_examples": 0}
    overrides: dict = {"n_examples": args.examples, "rng_seed": args.seed}
    if args.random:
        overrides["selection"] = DeploySelection.RANDOM
    elif args.examples is not None and cfg.deployment.selection is DeploySelection.NONE:
        overrides["selection"] = DeploySelection.RETRIEVED
    return overrides


def cmd_deploy(args: argparse.Namespace, cfg: AppConfig) -> int:
    tasks = [load_task_with_defaults(Path(p), cfg) for p in args.task_dirs]
    use_insight = args.bank == "insight"
    bank = CaseBank.open(cfg.banks.insight if use_insight else cfg.banks.agent)
    config = cfg.deploy_config(
        allow_mixed_bank=use_insight,
        run_id=args.run_id,
        timeout=tasks[0].settings.timeout if len(tasks) == 1 else None,
        **_deploy_selection(args, cfg),
    )

    async def body(runtime: Runtime) -> int:
        embedder = None if config.selection is DeploySelection.NONE else runtime.embedder
        if len(tasks) == 1:
            report = await run_deployment(tasks[0], bank, config, runtime.gateway, embedder, cfg.runs_dir)
            progress(
                f"{report.task_id}: cases={','.join(report.selected_case_ids) or '-'} "
                f"one_pass={'yes' if report.one_pass else 'no'} metric={_fmt_metric(report.result.metric)} "
                f"error={report.result.error_kind.value} cost={report.total_cost}"
            )
            print(Path(cfg.runs_dir) / report.run_id / "report.json")
            if report.aborted:
                return EXIT_PROVIDER
            return EXIT_OK if report.one_pass else EXIT_TASK_FAILED

        summary = await batch_deploy(
            tasks, bank, config, runtime.gateway, embedder, cfg.runs_dir, concurrency=cfg.deployment.concurrency
        )
        for entry in summary.tasks:
            progress(
                f"{entry.task_id}: one_pass={'yes' if entry.one_pass else 'no'} "
                f"metric={_fmt_metric(entry.metric)} error={entry.error_kind or entry.error or '-'}"
            )
        progress(f"one-pass rate {summary.one_pass_rate:.2f}, total cost {summary.total_cost}")
        print(Path(cfg.runs_dir) / "deploy_summary.json")
        return EXIT_OK if all(e.one_pass for e in summary.tasks) else EXIT_TASK_FAILED

    return asyncio.run(_with_runtime(cfg, body))


def cmd_bank(args: argparse.Namespace, cfg: AppConfig) -> int:
    path = Path(args.path) if args.path else (cfg.banks.insight if args.which == "insight" else cfg.banks.agent)
    bank = CaseBank.open(path)
    if args.action == "ls":
        print(render_list(bank))
    elif args.action == "show":
        if not args.case_id:
            raise ConfigError("bank show needs a case id")
        print(render_case(bank, args.case_id))
    else:
        print(render_stats(bank))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ds", description="Case-based data science agent")
    parser.add_argument("--config", type=Path, default=None, help="YAML configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="Add reports and code summaries to the insight bank")
    ingest.add_argument("reports_dir")
    ingest.add_argument("--bank", default=None, help="Insight bank path (default from config)")
    ingest.add_argument("--summarize", action="store_true", help="Summarise .py files into insights")
    ingest.add_argument("--modality", choices=[m.value for m in Modality], default=Modality.OTHER.value)

    develop = sub.add_parser("develop", help="Run the development loop on a task")
    develop.add_argument("task_dir")
    develop.add_argument("--mode", choices=["full", "no-reviserank", "no-cbr"], default=None)
    develop.add_argument("--iterations", type=int, default=None)
    develop.add_argument("--k", type=int, default=None)
    develop.add_argument("--debug-attempts", type=int, default=None)
    develop.add_argument("--direction", choices=[d.value for d in MetricDirection], default=None)
    develop.add_argument("--run-id", default=None)
    cassette = develop.add_mutually_exclusive_group()
    cassette.add_argument("--record", type=Path, default=None, help="Record exchanges to a cassette")
    cassette.add_argument("--replay", type=Path, default=None, help="Replay exchanges from a cassette")

    deploy = sub.add_parser("deploy", help="Solve one or more tasks in a single trial")
    deploy.add_argument("task_dirs", nargs="+")
    picks = deploy.add_mutually_exclusive_group()
    picks.add_argument("--random", action="store_true", help="Pick example cases at random")
    picks.add_argument("--zero-shot", action="store_true", help="Use no example cases")
    deploy.add_argument("--examples", type=int, default=None, help="Number of example cases")
    deploy.add_argument("--seed", type=int, default=None)
    deploy.add_argument("--bank", choices=["agent", "insight"], default="agent")
    deploy.add_argument("--run-id", default=None)

    bank = sub.add_parser("bank", help="Inspect a case bank")
    bank.add_argument("action", choices=["ls", "show", "stats"])
    bank.add_argument("case_id", nargs="?", default=None)
    bank.add_argument("--which", choices=["insight", "agent"], default="insight")
    bank.add_argument("--path", default=None, help="Bank path overriding --which")
    return parser


COMMANDS = {"ingest": cmd_ingest, "develop": cmd_develop, "deploy": cmd_deploy, "bank": cmd_bank}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        progress(f"config error: {e.message}")
        return EXIT_CONFIG
    setup_logging(cfg.logging.level, cfg.logging.format)

    try:
        return COMMANDS[args.command](args, cfg)
    except (GatewayError, EmbeddingError) as e:
        progress(f"provider error: {e}")
        return EXIT_PROVIDER
    except (ConfigError, PipelineError, ExecutorError, CaseBankError, RetrievalError, PromptKitError) as e:
        progress(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG
    except ValueError as e:
        # pydantic ValidationError from command-line overrides
        progress(f"invalid arguments: {e}")
        return EXIT_CONFIG


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
