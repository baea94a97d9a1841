"""Run directory layout and per-step artifact files."""

import json
import shutil
from pathlib import Path
from typing import Any, Dict, Optional

from ..utils.logger import get_logger
from .models import ExecutionResult

logger = get_logger(__name__)

_IGNORED = shutil.ignore_patterns(".dsagent.lock", "__pycache__")


class RunLayout:
    """
    Paths of one run under ``runs/<run-id>/``::

        workspace/        copy of the task directory the scripts run in
        step_<t>/         plan.md, script.py, stdout.txt, stderr.txt, result.json
        trace.jsonl
        report.json
    """

    def __init__(self, runs_dir: Path, run_id: str):
        self.root = Path(runs_dir) / run_id
        self.run_id = run_id

    @property
    def workspace(self) -> Path:
        return self.root / "workspace"

    @property
    def trace_path(self) -> Path:
        return self.root / "trace.jsonl"

    @property
    def report_path(self) -> Path:
        return self.root / "report.json"

    def step_dir(self, step: int) -> Path:
        return self.root / f"step_{step}"

    def prepare(self, task_root: Path) -> Path:
        """Create the run directory and a fresh workspace copy of the task."""
        self.root.mkdir(parents=True, exist_ok=True)
        if self.workspace.exists():
            shutil.rmtree(self.workspace)
        shutil.copytree(task_root, self.workspace, ignore=_IGNORED)
        logger.debug("workspace_prepared", run_id=self.run_id, workspace=str(self.workspace))
        return self.workspace

    def write_step(
        self,
        step: int,
        script: str,
        result: ExecutionResult,
        plan: Optional[str] = None,
        extra: Optional[Dict[str, Any]] = None,
    ) -> Path:
        directory = self.step_dir(step)
        directory.mkdir(parents=True, exist_ok=True)
        if plan is not None:
            (directory / "plan.md").write_text(plan, encoding="utf-8")
        (directory / "script.py").write_text(script, encoding="utf-8")
        (directory / "stdout.txt").write_text(result.stdout, encoding="utf-8")
        (directory / "stderr.txt").write_text(result.stderr, encoding="utf-8")
        payload = result.model_dump(mode="json", exclude={"stdout", "stderr"})
        if extra:
            payload.update(extra)
        (directory / "result.json").write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
        return directory

    def write_report(self, report: Dict[str, Any]) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        self.report_path.write_text(json.dumps(report, indent=2, sort_keys=True, default=str), encoding="utf-8")
        return self.report_path
