"""
Experiment reports and their CSV/JSON emitters.

The payload of a report depends only on the command line and the seed; the
creation time is kept in its own field and is only written when asked for.
"""

import csv
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import numpy as np

from src.errors import UsageError

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")


def plain(value: Any) -> Any:
    """numpy scalars/arrays to Python values, NaN and inf to None."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@dataclass
class ExperimentReport:
    command: List[str]
    subject: Dict[str, Any]
    seed: Optional[int] = None
    records: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    checks: List[Dict[str, Any]] = field(default_factory=list)
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def passed(self) -> bool:
        return all(check.get("passed", True) for check in self.checks)

    def as_dict(self, with_timestamp: bool = False) -> dict:
        payload = {
            "command": self.command,
            "subject": self.subject,
            "seed": self.seed,
            "records": self.records,
            "summary": self.summary,
            "checks": self.checks,
        }
        if with_timestamp:
            payload["created_at"] = self.created_at
        return plain(payload)

    def to_json(self, with_timestamp: bool = False) -> str:
        return json.dumps(self.as_dict(with_timestamp), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        """Per-step records as CSV; the header is the union of keys in first-seen order."""
        buffer = io.StringIO()
        columns: List[str] = []
        for record in self.records:
            columns.extend(k for k in record if k not in columns)
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for record in self.records:
            writer.writerow({k: ("" if v is None else v) for k, v in plain(record).items()})
        return buffer.getvalue()

    def render(self, fmt: str, with_timestamp: bool = False) -> str:
        if fmt not in FORMATS:
            raise UsageError(f"unknown output format {fmt!r}; choose one of {', '.join(FORMATS)}")
        return self.to_json(with_timestamp) if fmt == "json" else self.to_csv()


def emit(report: ExperimentReport, fmt: str, out: Optional[str] = None, stream=None,
         with_timestamp: bool = False) -> Optional[str]:
    """Write the report to `out` (a path) or to `stream`; returns the path written, if any."""
    text = report.render(fmt, with_timestamp)
    if out:
        directory = os.path.dirname(out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info("wrote %s report to %s", fmt, out)
        return out
    stream.write(text)
    return None
