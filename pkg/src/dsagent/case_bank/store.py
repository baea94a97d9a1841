"""JSON-lines case bank persistence."""

import contextlib
import fcntl
import json
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from ..utils.logger import get_logger
from .exceptions import BankDimensionError, BankFormatError, BankPersistError, DuplicateCaseError
from .models import Case

logger = get_logger(__name__)

BANK_FILE = "cases.jsonl"


def _bank_file(path: Path) -> Path:
    path = Path(path)
    return path / BANK_FILE if path.is_dir() or path.suffix == "" else path


def read_cases(path: Path) -> List[Case]:
    """Parse a bank file; any bad line aborts the whole load."""
    cases: List[Case] = []
    seen: Dict[str, int] = {}
    dim: Optional[int] = None
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if not line.endswith("\n"):
                raise BankFormatError("Partial record without trailing newline", line_no)
            try:
                case = Case.model_validate(json.loads(line))
            except json.JSONDecodeError as e:
                raise BankFormatError(f"Invalid JSON: {e.msg}", line_no) from e
            except ValidationError as e:
                raise BankFormatError(f"Invalid case: {e.errors()[0]['msg']}", line_no) from e
            if case.id in seen:
                raise BankFormatError(f"Duplicate case id {case.id!r}", line_no)
            if dim is None:
                dim = case.dim
            elif case.dim != dim:
                raise BankFormatError(f"Embedding dimension {case.dim} differs from {dim}", line_no)
            seen[case.id] = line_no
            cases.append(case)
    return cases


def _serialise(cases: Sequence[Case]) -> str:
    return "".join(json.dumps(c.to_record(), ensure_ascii=False) + "\n" for c in cases)


def _write_temp(target: Path, content: str) -> Path:
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
            fh.flush()
            os.fsync(fh.fileno())
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp_name)
        raise
    return Path(tmp_name)


def commit_atomically(writes: Sequence[Tuple[Path, Sequence[Case]]]) -> None:
    """
    Replace several bank files so that either all or none change.

    Every new file is written to a temp sibling first. Renames happen only
    after all temps exist; a failed rename restores the files already swapped.
    """
    temps: List[Tuple[Path, Path]] = []
    originals: Dict[Path, Optional[str]] = {}
    try:
        for target, cases in writes:
            originals[target] = target.read_text(encoding="utf-8") if target.exists() else None
            temps.append((target, _write_temp(target, _serialise(cases))))
    except OSError as e:
        for _, tmp in temps:
            with contextlib.suppress(OSError):
                tmp.unlink()
        raise BankPersistError(f"Failed to stage bank write: {e}", original_error=e) from e

    swapped: List[Path] = []
    try:
        for target, tmp in temps:
            os.replace(tmp, target)
            swapped.append(target)
    except OSError as e:
        for target in swapped:
            previous = originals[target]
            with contextlib.suppress(OSError):
                if previous is None:
                    target.unlink()
                else:
                    os.replace(_write_temp(target, previous), target)
        for target, tmp in temps:
            if target not in swapped:
                with contextlib.suppress(OSError):
                    tmp.unlink()
        raise BankPersistError(f"Failed to commit bank write: {e}", original_error=e) from e


@contextlib.contextmanager
def exclusive_lock(*files: Path) -> Iterator[None]:
    """Hold exclusive flocks on the lock siblings of ``files`` in path order."""
    handles = []
    try:
        for target in sorted({Path(f).resolve() for f in files}):
            target.parent.mkdir(parents=True, exist_ok=True)
            fh = open(target.with_name(target.name + ".lock"), "a+")
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
            handles.append(fh)
        yield
    finally:
        for fh in reversed(handles):
            fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
            fh.close()


class CaseBank:
    """Ordered, persisted collection of cases sharing one embedding dimension."""

    def __init__(self, path: Path, cases: Optional[Sequence[Case]] = None):
        self.path = _bank_file(path)
        self.cases: List[Case] = list(cases or [])

    @classmethod
    def load(cls, path: Path) -> "CaseBank":
        """
        Load a bank from ``path`` (a ``cases.jsonl`` file or its directory).

        Raises:
            FileNotFoundError: Bank file does not exist
            BankFormatError: Malformed record, naming the line
        """
        bank_path = _bank_file(path)
        if not bank_path.exists():
            raise FileNotFoundError(f"Case bank not found: {bank_path}")
        bank = cls(bank_path, read_cases(bank_path))
        logger.debug("bank_loaded", path=str(bank_path), size=len(bank), dim=bank.dim)
        return bank

    @classmethod
    def open(cls, path: Path) -> "CaseBank":
        """Load an existing bank or start an empty one at ``path``."""
        bank_path = _bank_file(path)
        return cls.load(bank_path) if bank_path.exists() else cls(bank_path)

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self) -> Iterator[Case]:
        return iter(self.cases)

    @property
    def dim(self) -> Optional[int]:
        return self.cases[0].dim if self.cases else None

    @property
    def ids(self) -> List[str]:
        return [c.id for c in self.cases]

    def get(self, case_id: str) -> Optional[Case]:
        return next((c for c in self.cases if c.id == case_id), None)

    def save(self) -> None:
        """Atomically write the in-memory cases to ``path``."""
        with exclusive_lock(self.path):
            commit_atomically([(self.path, self.cases)])

    def reload(self) -> None:
        """Refresh from disk when a bank file exists; callers writing must hold the lock."""
        if self.path.exists():
            self.cases = read_cases(self.path)

    def check_insertable(self, case: Case) -> None:
        if self.dim is not None and case.dim != self.dim:
            raise BankDimensionError(self.dim, case.dim)
        if self.get(case.id) is not None:
            raise DuplicateCaseError(case.id)

    def add_case(self, case: Case) -> str:
        """
        Append one case and persist before returning its id.

        Raises:
            BankDimensionError: Embedding dimension differs from the bank's
            DuplicateCaseError: Id already present
            BankPersistError: Write failed; bank unchanged
        """
        with exclusive_lock(self.path):
            self.reload()
            self.check_insertable(case)
            commit_atomically([(self.path, [*self.cases, case])])
            self.cases.append(case)
        logger.info("case_added", bank=str(self.path), case_id=case.id, size=len(self))
        return case.id


def add_case(bank: CaseBank, case: Case) -> str:
    return bank.add_case(case)


def load(path: Path) -> CaseBank:
    return CaseBank.load(path)


def save(bank: CaseBank) -> None:
    bank.save()
