"""Script diffs and running-log bookkeeping for the Logger."""

import difflib

CONTEXT_LINES = 3
LOG_SEPARATOR = "\n\n"


def code_diff(old_script: str, new_script: str, filename: str = "train.py") -> str:
    """Unified diff with three context lines; empty for identical scripts."""
    lines = difflib.unified_diff(
        old_script.splitlines(),
        new_script.splitlines(),
        fromfile=f"a/{filename}",
        tofile=f"b/{filename}",
        n=CONTEXT_LINES,
        lineterm="",
    )
    return "\n".join(lines)


def step_header(step: int) -> str:
    return f"[Step {step}]"


def append_log(running_log: str, reply: str, step: int) -> str:
    entry = f"{step_header(step)}\n{reply.strip()}"
    if not running_log:
        return entry
    return f"{running_log}{LOG_SEPARATOR}{entry}"
