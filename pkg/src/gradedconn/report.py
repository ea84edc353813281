"""Check reports: one row per (check, case, point), JSON-lines serialisation, exit codes.

A report is deterministic for a given manifest and engine version; the only field that
changes between runs is ``generated_at`` in the header.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_ERROR = "error"
STATUS_INFO = "info"
STATUSES = (STATUS_PASS, STATUS_FAIL, STATUS_ERROR, STATUS_INFO)


@dataclass
class CheckRow:
    """A single residual measurement, safe to serialize into a report."""

    suite: str
    equation: str
    case: str  # generator labels, e.g. "L1,i2"
    point_index: int  # -1 when the check failed before reaching the points
    point: List[float]
    residual: Optional[float]
    tolerance: float
    status: str  # "pass" | "fail" | "error" | "info"
    error: Optional[str] = None  # error tag
    note: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        for key in ("error", "note"):
            if d[key] is None:
                d.pop(key)
        return d

    def sort_key(self) -> Tuple[str, str, str, int]:
        return (self.suite, self.equation, self.case, self.point_index)


@dataclass
class CheckReport:
    """All rows of one suite run over one manifest."""

    suite: str
    manifest_name: str
    manifest_hash: str
    engine_version: str
    rows: List[CheckRow] = field(default_factory=list)
    schema_version: str = "1.0"
    generated_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def sort(self) -> None:
        self.rows.sort(key=CheckRow.sort_key)

    @property
    def summary(self) -> Dict[str, int]:
        counts = {status: 0 for status in STATUSES}
        for row in self.rows:
            counts[row.status] = counts.get(row.status, 0) + 1
        counts["total"] = len(self.rows)
        return counts

    @property
    def passed(self) -> bool:
        summary = self.summary
        return summary[STATUS_FAIL] == 0 and summary[STATUS_ERROR] == 0

    def failing_equations(self) -> Dict[str, int]:
        """Equation id mapped to its count of failed or errored rows."""
        out: Dict[str, int] = {}
        for row in self.rows:
            if row.status in (STATUS_FAIL, STATUS_ERROR):
                out[row.equation] = out.get(row.equation, 0) + 1
        return out

    def rows_for(self, equation: str) -> List[CheckRow]:
        return [row for row in self.rows if row.equation == equation]

    def max_residual(self, equation: str) -> float:
        values = [r.residual for r in self.rows_for(equation) if r.residual is not None]
        return max(values, default=0.0)

    def exit_code(self) -> int:
        """0 iff no row failed or errored."""
        return 0 if self.passed else 1

    def header(self) -> Dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "suite": self.suite,
            "manifest": self.manifest_name,
            "manifest_hash": self.manifest_hash,
            "engine_version": self.engine_version,
            "generated_at": self.generated_at,
            "summary": self.summary,
        }

    def to_dict(self) -> Dict[str, Any]:
        d = self.header()
        d["rows"] = [row.to_dict() for row in self.rows]
        return d

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header(), sort_keys=True)]
        lines += [json.dumps(row.to_dict(), sort_keys=True) for row in self.rows]
        return "\n".join(lines)
