"""Integration tests for the script sandbox (real subprocesses)."""
import os
import sys
import textwrap

import psutil
import pytest

from dsagent.executor import (
    CommandEvaluator,
    ErrorKind,
    InterpreterNotFoundError,
    SandboxPolicy,
    WorkdirBusyError,
    WorkdirError,
    detect_error,
    run_file,
    run_script,
)
from dsagent.executor.sandbox import SANDBOX_TAG_VAR, build_env, tagged_processes, workdir_lock

pytestmark = [pytest.mark.integration, pytest.mark.slow]

DETACHED_CHILD = textwrap.dedent(
    """
    import os, time
    if os.fork() == 0:
        os.setsid()
        with open("detached.tmp", "w") as fh:
            fh.write(str(os.getpid()))
        os.rename("detached.tmp", "detached.pid")
        time.sleep(30)
        os._exit(0)
    while not os.path.exists("detached.pid"):
        time.sleep(0.05)
    print("parent done", flush=True)
    """
)

FORK_BOMB = textwrap.dedent(
    """
    import os, time
    with open("leader.pid", "w") as fh:
        fh.write(str(os.getpid()))

    def note():
        with open("pids.txt", "a") as fh:
            fh.write(f"{os.getpid()}\\n")

    for _ in range(20):
        try:
            if os.fork() == 0:
                note()
                try:
                    os.fork()
                    note()
                except OSError:
                    pass
                time.sleep(60)
                os._exit(0)
        except OSError:
            print("fork refused", flush=True)
            break
    time.sleep(60)
    """
)


def alive(pid: int) -> bool:
    try:
        return psutil.Process(pid).status() != psutil.STATUS_ZOMBIE
    except psutil.NoSuchProcess:
        return False


def group_members(pgid: int) -> list:
    members = []
    for proc in psutil.process_iter(["status"]):
        try:
            if os.getpgid(proc.pid) == pgid and proc.info["status"] != psutil.STATUS_ZOMBIE:
                members.append(proc.pid)
        except OSError:
            continue
    return members


@pytest.fixture
def policy(tmp_path):
    return SandboxPolicy(workdir=tmp_path, timeout=30)


class TestRunScript:
    """Test cases for run_script."""

    @pytest.mark.asyncio
    async def test_clean_run(self, policy, tmp_path):
        result = await run_script("print('hi')", policy)

        assert result.exit_code == 0
        assert result.stdout == "hi\n"
        assert result.error_kind is ErrorKind.NONE
        assert detect_error(result) is False
        assert (tmp_path / "train.py").read_text() == "print('hi')"

    @pytest.mark.asyncio
    async def test_metric_extracted(self, policy):
        result = await run_script('print("final accuracy on validation set: 0.82")', policy)
        assert result.metric == 0.82

    @pytest.mark.asyncio
    async def test_exception_is_a_result(self, policy):
        result = await run_script("raise ValueError('could not convert string to float')", policy)

        assert result.exit_code != 0
        assert "Traceback (most recent call last):" in result.stderr
        assert result.error_kind is ErrorKind.DTYPE_MISMATCH

    @pytest.mark.asyncio
    async def test_timeout_kills_the_script(self, tmp_path):
        policy = SandboxPolicy(workdir=tmp_path, timeout=1.0)

        result = await run_script("import time\nprint('started', flush=True)\ntime.sleep(60)", policy)

        assert result.timed_out is True
        assert result.error_kind is ErrorKind.TIMEOUT
        assert result.metric is None
        assert "started" in result.stdout
        assert result.duration < 30

    @pytest.mark.asyncio
    async def test_crashed_child_is_detected(self, policy):
        script = textwrap.dedent(
            """
            import os
            pid = os.fork()
            if pid == 0:
                raise KeyError("label")
            os.waitpid(pid, 0)
            print("parent done")
            """
        )
        result = await run_script(script, policy)

        assert result.exit_code == 0
        assert detect_error(result) is True
        assert result.error_kind is ErrorKind.KEY_ERROR

    @pytest.mark.asyncio
    async def test_output_is_capped(self, tmp_path):
        policy = SandboxPolicy(workdir=tmp_path, timeout=30, max_output_bytes=100)

        result = await run_script("print('x' * 10000)", policy)

        assert len(result.stdout) == 100
        assert result.stdout_truncated is True
        assert result.stderr_truncated is False

    @pytest.mark.asyncio
    async def test_environment_is_minimal(self, tmp_path, monkeypatch):
        monkeypatch.setenv("DSAGENT_SECRET_TOKEN", "leak")
        policy = SandboxPolicy(workdir=tmp_path, timeout=30, extra_env={"SEED": "7"})

        result = await run_script(
            "import os\nprint(os.environ.get('DSAGENT_SECRET_TOKEN'), os.environ.get('SEED'))", policy
        )

        assert result.stdout.strip() == "None 7"

    @pytest.mark.asyncio
    async def test_missing_workdir(self, tmp_path):
        with pytest.raises(WorkdirError):
            await run_script("print(1)", SandboxPolicy(workdir=tmp_path / "absent"))

    @pytest.mark.asyncio
    async def test_missing_interpreter(self, tmp_path):
        policy = SandboxPolicy(workdir=tmp_path, interpreter="no-such-python-3.99")
        with pytest.raises(InterpreterNotFoundError):
            await run_script("print(1)", policy)

    @pytest.mark.asyncio
    async def test_busy_workdir(self, policy, tmp_path):
        with workdir_lock(tmp_path):
            with pytest.raises(WorkdirBusyError):
                await run_script("print(1)", policy)


class TestBuildEnv:
    """Test cases for the child environment."""

    def test_passthrough(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CUDA_VISIBLE_DEVICES", "0")
        monkeypatch.setenv("AWS_SECRET_ACCESS_KEY", "x")
        policy = SandboxPolicy(workdir=tmp_path, env_passthrough=["CUDA_VISIBLE_DEVICES"])

        env = build_env(policy, sys.executable)

        assert env["CUDA_VISIBLE_DEVICES"] == "0"
        assert "AWS_SECRET_ACCESS_KEY" not in env
        assert env["HOME"] == str(tmp_path)
        assert env["PYTHONUNBUFFERED"] == "1"


class TestEvaluator:
    """Test cases for held-out scoring."""

    @pytest.mark.asyncio
    async def test_command_evaluator(self, policy, tmp_path):
        (tmp_path / "score.py").write_text('print("final accuracy on validation set: 0.91")')
        script_result = await run_script("print('trained')", policy)

        score = await CommandEvaluator("score.py").evaluate(policy, script_result)

        assert score == 0.91

    @pytest.mark.asyncio
    async def test_failing_evaluator(self, policy, tmp_path):
        (tmp_path / "score.py").write_text("raise SystemExit(2)")
        script_result = await run_script("print('trained')", policy)

        assert await CommandEvaluator("score.py").evaluate(policy, script_result) is None

    @pytest.mark.asyncio
    async def test_run_file_needs_file(self, policy):
        with pytest.raises(WorkdirError):
            await run_file("score.py", policy)


class TestContainment:
    """Test cases for cleanup of everything a script spawns."""

    @pytest.mark.asyncio
    async def test_traceback_names_script_relatively(self, policy, tmp_path):
        result = await run_script("print(undefined_name)", policy)

        assert 'File "train.py"' in result.stderr
        assert str(tmp_path) not in result.stderr
        assert str(tmp_path.resolve()) not in result.stderr

    @pytest.mark.asyncio
    async def test_detached_child_killed_after_clean_exit(self, policy, tmp_path):
        result = await run_script(DETACHED_CHILD, policy)

        assert result.exit_code == 0
        assert "parent done" in result.stdout
        assert alive(int((tmp_path / "detached.pid").read_text())) is False

    @pytest.mark.asyncio
    async def test_detached_child_killed_after_crash(self, policy, tmp_path):
        result = await run_script(DETACHED_CHILD + "raise KeyError('label')\n", policy)

        assert result.error_kind is ErrorKind.KEY_ERROR
        assert alive(int((tmp_path / "detached.pid").read_text())) is False

    @pytest.mark.asyncio
    async def test_timeout_leaves_no_descendants(self, tmp_path):
        policy = SandboxPolicy(workdir=tmp_path, timeout=2.0)
        script = DETACHED_CHILD.replace('print("parent done", flush=True)', "time.sleep(60)")

        result = await run_script(script, policy)

        assert result.timed_out is True
        assert alive(int((tmp_path / "detached.pid").read_text())) is False

    @pytest.mark.asyncio
    async def test_fork_bomb_is_contained(self, tmp_path):
        policy = SandboxPolicy(workdir=tmp_path, timeout=3.0, max_processes=64)

        result = await run_script(FORK_BOMB, policy)

        assert result.timed_out is True
        leader = int((tmp_path / "leader.pid").read_text())
        pids_file = tmp_path / "pids.txt"
        spawned = [int(p) for p in pids_file.read_text().split()] if pids_file.exists() else []
        assert [pid for pid in [leader, *spawned] if alive(pid)] == []
        assert group_members(leader) == []

    @pytest.mark.asyncio
    async def test_process_limit_is_applied(self, tmp_path):
        policy = SandboxPolicy(workdir=tmp_path, timeout=30, max_processes=512)

        result = await run_script(
            "import resource\nprint(*resource.getrlimit(resource.RLIMIT_NPROC))", policy
        )

        assert result.stdout.strip() == "512 512"

    @pytest.mark.asyncio
    async def test_scripts_carry_a_sandbox_tag(self, policy):
        result = await run_script(f"import os\nprint(os.environ['{SANDBOX_TAG_VAR}'])", policy)

        tag = result.stdout.strip()
        assert len(tag) == 32
        assert tagged_processes(tag) == []
