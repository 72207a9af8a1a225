"""Run artifacts: atomic files, canonical JSON, RFC-4180 CSV, experiment records.

Every artifact is written to a temporary file in the destination directory and
renamed into place, so a killed run never leaves a half-written file under the
final name.  JSON is canonical (sorted keys, fixed separators) and CSV rows
are emitted in a deterministic order, so re-emitting the same record is
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
from dataclasses import dataclass, field

from .circuits import check_schema_version
from .errors import IncompleteRecord

SCHEMA_VERSION = "1.0.0"


def write_atomic(path: str, data: str | bytes) -> None:
    """Write via temp-file-plus-rename in the destination directory."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _json_safe(obj):
    """Recursively make obj JSON-serializable; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float):
        return obj if obj == obj and abs(obj) != float("inf") else None
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_json_safe(obj), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def write_json(path: str, obj) -> None:
    write_atomic(path, canonical_json(obj) + "\n")


def read_json(path: str):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None or v != v else v for v in row])
    return buf.getvalue()


def write_csv(path: str, header: list[str], rows) -> None:
    write_atomic(path, csv_text(header, rows))


@dataclass
class Table:
    """One emitted data file: a header plus deterministic rows."""

    header: list[str]
    rows: list[list]

    def to_dict(self) -> dict:
        return {"header": list(self.header), "rows": _json_safe(self.rows)}

    @staticmethod
    def from_dict(d: dict) -> "Table":
        return Table(header=list(d["header"]), rows=[list(r) for r in d["rows"]])


@dataclass
class ExperimentRecord:
    command: str
    config_text: str
    config_hash: str
    metrics: dict = field(default_factory=dict)
    tables: dict[str, Table] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)  # name -> relative path
    created_utc: str = ""

    def __post_init__(self):
        if not self.created_utc:
            self.created_utc = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config_text": self.config_text,
            "config_hash": self.config_hash,
            "metrics": _json_safe(self.metrics),
            "tables": {name: t.to_dict() for name, t in sorted(self.tables.items())},
            "artifacts": dict(sorted(self.artifacts.items())),
            "created_utc": self.created_utc,
        }

    @staticmethod
    def from_dict(d: dict) -> "ExperimentRecord":
        check_schema_version(d.get("schema_version", "0"))
        return ExperimentRecord(
            command=d["command"],
            config_text=d["config_text"],
            config_hash=d["config_hash"],
            metrics=d.get("metrics", {}),
            tables={k: Table.from_dict(v) for k, v in d.get("tables", {}).items()},
            artifacts=d.get("artifacts", {}),
            created_utc=d.get("created_utc", ""),
        )


def save_record(record: ExperimentRecord, run_dir: str) -> str:
    path = os.path.join(run_dir, "record.json")
    write_json(path, record.to_dict())
    return path


def load_record(path: str) -> ExperimentRecord:
    return ExperimentRecord.from_dict(read_json(path))


def emit_plotdata(record: ExperimentRecord, run_dir: str) -> list[str]:
    """Write every table of the record as a CSV; returns the paths written.

    Tables are emitted in name order and rows are stored in the record, so
    re-emitting the same record produces byte-identical files.
    """
    if not record.tables:
        raise IncompleteRecord(f"record for {record.command} has no data tables")
    paths = []
    for name in sorted(record.tables):
        table = record.tables[name]
        if not table.rows:
            raise IncompleteRecord(f"table {name!r} is empty")
        path = os.path.join(run_dir, f"{name}.csv")
        write_csv(path, table.header, table.rows)
        paths.append(path)
    return paths
