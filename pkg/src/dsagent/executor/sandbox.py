"""Process-group sandbox for generated training scripts."""

import asyncio
import contextlib
import fcntl
import os
import shutil
import signal
import time
import uuid
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import psutil

from ..utils.logger import get_logger
from .analysis import DEFAULT_METRIC_PATTERN, classify_error, extract_metric
from .exceptions import InterpreterNotFoundError, SpawnError, WorkdirBusyError, WorkdirError
from .models import ExecutionResult, SandboxPolicy

logger = get_logger(__name__)

SCRIPT_NAME = "train.py"
LOCK_NAME = ".dsagent.lock"
SANDBOX_TAG_VAR = "DSAGENT_SANDBOX_TAG"
_CHUNK = 65536
_KILL_DEADLINE = 10.0
_DRAIN_GRACE = 5.0


@contextlib.contextmanager
def workdir_lock(workdir: Path) -> Iterator[None]:
    """Non-blocking exclusive lock; one run per workdir at a time."""
    fh = open(workdir / LOCK_NAME, "a+")
    try:
        try:
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except BlockingIOError as e:
            raise WorkdirBusyError(workdir) from e
        try:
            yield
        finally:
            fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
    finally:
        fh.close()


def resolve_interpreter(interpreter: str) -> str:
    found = shutil.which(interpreter)
    if found:
        return found
    if os.path.isfile(interpreter) and os.access(interpreter, os.X_OK):
        return interpreter
    raise InterpreterNotFoundError(interpreter)


def build_env(policy: SandboxPolicy, interpreter: str) -> Dict[str, str]:
    """Minimal environment: interpreter dir on PATH plus explicitly allowed names."""
    env = {
        "PATH": os.pathsep.join([os.path.dirname(interpreter), "/usr/local/bin", "/usr/bin", "/bin"]),
        "HOME": str(policy.workdir),
        "LANG": "C.UTF-8",
        "PYTHONUNBUFFERED": "1",
        "PYTHONDONTWRITEBYTECODE": "1",
    }
    for name in policy.env_passthrough:
        if name in os.environ:
            env[name] = os.environ[name]
    env.update(policy.extra_env)
    return env


def _limits(policy: SandboxPolicy) -> Optional[Callable[[], None]]:
    if policy.memory_mb is None and policy.max_processes is None:
        return None

    def apply() -> None:
        import resource

        if policy.memory_mb is not None:
            limit = policy.memory_mb * 1024 * 1024
            resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
        if policy.max_processes is not None:
            resource.setrlimit(resource.RLIMIT_NPROC, (policy.max_processes, policy.max_processes))

    return apply


async def _drain(stream: Optional[asyncio.StreamReader], cap: int) -> Tuple[bytes, bool]:
    """Read a stream to EOF, keeping at most ``cap`` bytes."""
    if stream is None:
        return b"", False
    kept = bytearray()
    truncated = False
    while True:
        chunk = await stream.read(_CHUNK)
        if not chunk:
            break
        room = cap - len(kept)
        if room > 0:
            kept.extend(chunk[:room])
        if len(chunk) > room:
            truncated = True
    return bytes(kept), truncated


def tagged_processes(tag: str) -> List[psutil.Process]:
    """Live processes whose environment carries ``tag`` under SANDBOX_TAG_VAR."""
    found = []
    for proc in psutil.process_iter(["environ", "status"]):
        if proc.pid == os.getpid() or proc.info["status"] == psutil.STATUS_ZOMBIE:
            continue
        environ = proc.info["environ"] or {}
        if environ.get(SANDBOX_TAG_VAR) == tag:
            found.append(proc)
    return found


async def _kill_group(pgid: int, tag: str) -> None:
    """SIGKILL the process group until it is empty, then every process carrying ``tag``."""
    deadline = time.monotonic() + _KILL_DEADLINE
    while True:
        try:
            os.killpg(pgid, signal.SIGKILL)
        except ProcessLookupError:
            break
        except PermissionError:
            break
        if time.monotonic() > deadline:
            logger.warning("process_group_survived", pgid=pgid)
            break
        await asyncio.sleep(0.05)

    # setsid'd descendants left the group but kept the environment
    while True:
        stragglers = tagged_processes(tag)
        if not stragglers:
            break
        for proc in stragglers:
            with contextlib.suppress(psutil.Error):
                proc.kill()
        if time.monotonic() > deadline:
            logger.warning("sandbox_descendants_survived", pids=[p.pid for p in stragglers])
            break
        await asyncio.to_thread(psutil.wait_procs, stragglers, 0.5)
        logger.debug("sandbox_descendants_killed", count=len(stragglers))


def _relative_paths(text: str, workdir: Path) -> str:
    """Show files of the workdir by their relative name."""
    roots = {str(workdir.resolve()), str(workdir.absolute())}
    for root in sorted(roots, key=len, reverse=True):
        text = text.replace(root + os.sep, "")
    return text


async def execute(policy: SandboxPolicy, filename: str = SCRIPT_NAME, metric_pattern: str = DEFAULT_METRIC_PATTERN) -> ExecutionResult:
    """Run ``filename`` inside ``policy.workdir``; the caller holds the workdir lock."""
    workdir = Path(policy.workdir)
    interpreter = resolve_interpreter(policy.interpreter)
    tag = uuid.uuid4().hex
    env = build_env(policy, interpreter)
    env[SANDBOX_TAG_VAR] = tag
    start = time.monotonic()
    try:
        proc = await asyncio.create_subprocess_exec(
            interpreter,
            filename,
            cwd=str(workdir),
            env=env,
            stdin=asyncio.subprocess.DEVNULL,
            stdout=asyncio.subprocess.PIPE,
            stderr=asyncio.subprocess.PIPE,
            start_new_session=True,
            preexec_fn=_limits(policy),
        )
    except OSError as e:
        raise SpawnError(f"Failed to launch {interpreter}: {e}", original_error=e) from e

    logger.debug("script_started", pid=proc.pid, workdir=str(workdir), timeout=policy.timeout)
    out_task = asyncio.create_task(_drain(proc.stdout, policy.max_output_bytes))
    err_task = asyncio.create_task(_drain(proc.stderr, policy.max_output_bytes))

    timed_out = False
    try:
        await asyncio.wait_for(proc.wait(), timeout=policy.timeout)
    except asyncio.TimeoutError:
        timed_out = True
    finally:
        await _kill_group(proc.pid, tag)
        await proc.wait()

    try:
        (out, out_truncated), (err, err_truncated) = await asyncio.wait_for(
            asyncio.gather(out_task, err_task), timeout=_DRAIN_GRACE
        )
    except asyncio.TimeoutError:
        # a setsid'd grandchild kept a pipe open
        out_task.cancel()
        err_task.cancel()
        out, out_truncated, err, err_truncated = b"", True, b"", True
    duration = time.monotonic() - start

    stdout = _relative_paths(out.decode("utf-8", errors="replace"), workdir)
    result = ExecutionResult(
        exit_code=proc.returncode if proc.returncode is not None else -signal.SIGKILL,
        stdout=stdout,
        stderr=_relative_paths(err.decode("utf-8", errors="replace"), workdir),
        duration=duration,
        timed_out=timed_out,
        metric=None if timed_out else extract_metric(stdout, metric_pattern),
        stdout_truncated=out_truncated,
        stderr_truncated=err_truncated,
    )
    result = result.model_copy(update={"error_kind": classify_error(result)})
    logger.info(
        "script_finished",
        exit_code=result.exit_code,
        timed_out=timed_out,
        metric=result.metric,
        duration=round(duration, 3),
    )
    return result


async def run_script(
    script: str,
    policy: SandboxPolicy,
    metric_pattern: str = DEFAULT_METRIC_PATTERN,
) -> ExecutionResult:
    """
    Write ``script`` to ``train.py`` in the workdir and run it.

    A crashing or hanging script yields a normal result. Setup problems
    raise.

    Raises:
        WorkdirError: Workdir missing or busy
        InterpreterNotFoundError: Interpreter cannot be resolved
        SpawnError: The OS refused to start the process
    """
    workdir = Path(policy.workdir)
    if not workdir.is_dir():
        raise WorkdirError(workdir)
    with workdir_lock(workdir):
        (workdir / SCRIPT_NAME).write_text(script, encoding="utf-8")
        return await execute(policy, SCRIPT_NAME, metric_pattern)


async def run_file(
    filename: str,
    policy: SandboxPolicy,
    metric_pattern: str = DEFAULT_METRIC_PATTERN,
) -> ExecutionResult:
    """Run an existing file of the workdir under the same containment."""
    workdir = Path(policy.workdir)
    if not (workdir / filename).is_file():
        raise WorkdirError(workdir, f"has no file {filename}")
    with workdir_lock(workdir):
        return await execute(policy, filename, metric_pattern)
