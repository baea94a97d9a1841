"""Optional held-out scoring after a clean run."""

from typing import Optional, Protocol

from ..utils.logger import get_logger
from .analysis import DEFAULT_METRIC_PATTERN, compile_metric_pattern
from .models import ExecutionResult, SandboxPolicy
from .sandbox import run_file

logger = get_logger(__name__)


class Evaluator(Protocol):
    """Replaces the script-reported metric with an external score."""

    async def evaluate(self, policy: SandboxPolicy, result: ExecutionResult) -> Optional[float]: ...


class CommandEvaluator:
    """Runs a scorer script from the workspace and reads its printed metric."""

    def __init__(self, filename: str, pattern: Optional[str] = None):
        self.filename = filename
        self.pattern = compile_metric_pattern(pattern or DEFAULT_METRIC_PATTERN).pattern

    async def evaluate(self, policy: SandboxPolicy, result: ExecutionResult) -> Optional[float]:
        scored = await run_file(self.filename, policy, self.pattern)
        if scored.exit_code != 0 or scored.timed_out:
            logger.warning("evaluator_failed", filename=self.filename, exit_code=scored.exit_code)
            return None
        return scored.metric
