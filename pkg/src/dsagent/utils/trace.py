"""Append-only JSONL run trace.

Records carry no wall-clock data so that a run replayed from a cassette
reproduces the file byte for byte.
"""

import asyncio
import json
from pathlib import Path
from typing import Any, Dict, List, Optional


class TraceWriter:
    """Ordered record sink for one pipeline run."""

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else None
        self.records: List[Dict[str, Any]] = []
        self._lock = asyncio.Lock()
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("", encoding="utf-8")

    def write(self, record_type: str, **fields: Any) -> Dict[str, Any]:
        record: Dict[str, Any] = {"seq": len(self.records), "type": record_type, **fields}
        self.records.append(record)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        return record

    async def awrite(self, record_type: str, **fields: Any) -> Dict[str, Any]:
        async with self._lock:
            return self.write(record_type, **fields)

    def of_type(self, record_type: str) -> List[Dict[str, Any]]:
        return [r for r in self.records if r["type"] == record_type]


def read_trace(path: Path) -> List[Dict[str, Any]]:
    """Load a trace file written by TraceWriter."""
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
