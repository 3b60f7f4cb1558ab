"""Run reports: JSON/CSV serialization with atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import metadata

SCHEMA_VERSION = 1
CSV_FIELDS = ("suite", "name", "group", "anchor", "value", "bound", "passed")


def tool_version() -> str:
    try:
        return metadata.version("rieszlab")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


@dataclass
class RunReport:
    config: dict
    records: list
    timing: dict = field(default_factory=dict)
    version: str = field(default_factory=tool_version)
    schema_version: int = SCHEMA_VERSION

    @property
    def summary(self) -> dict:
        n_pass = sum(bool(r["passed"]) for r in self.records)
        return {"total": len(self.records), "passed": n_pass, "failed": len(self.records) - n_pass}

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.records)

    @classmethod
    def from_checks(cls, config: dict, checks, timing: dict | None = None) -> "RunReport":
        return cls(_clean(config), [_clean(c.to_dict()) for c in checks], dict(timing or {}))

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "schema_version": self.schema_version,
            "version": self.version,
            "config": self.config,
            "records": self.records,
            "summary": self.summary,
            "passed": self.passed,
        }
        if timing:
            d["timing"] = self.timing
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(d["config"], d["records"], d.get("timing", {}), d["version"], d["schema_version"])

    def __eq__(self, other) -> bool:
        return isinstance(other, RunReport) and self.to_dict() == other.to_dict()


def to_json(report: RunReport, timing: bool = True) -> str:
    return json.dumps(report.to_dict(timing), sort_keys=True, indent=2) + "\n"


def from_json(text: str) -> RunReport:
    return RunReport.from_dict(json.loads(text))


def to_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in report.records:
        w.writerow([r[k] for k in CSV_FIELDS])
    return buf.getvalue()


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` next to ``path`` and rename it into place."""
    path = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".rieszlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(report: RunReport, fmt: str, path: str) -> str:
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        text = to_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    atomic_write(path, text)
    return path
