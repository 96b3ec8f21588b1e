"""CSV / JSON report writing and reading, plus the per-run manifest."""

import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..utils.config import get_config
from ..utils.error_handlers import ReportParseError
from ..utils.logger import get_logger
from ..utils.validators import validate_output_path

NON_FINITE = {math.inf: "inf", -math.inf: "-inf"}


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, paths and non-finite floats into plain JSON values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return NON_FINITE.get(value, value)
    if isinstance(value, complex):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    if isinstance(value, Path):
        return str(value)
    return value


def from_jsonable(value: Any) -> Any:
    """Inverse of the non-finite float encoding."""
    if isinstance(value, dict):
        return {k: from_jsonable(v) for k, v in value.items()}
    if isinstance(value, list):
        return [from_jsonable(v) for v in value]
    if value in ("inf", "-inf", "nan"):
        return float(value)
    return value


class ReportWriter:
    """Single writer for every file a run produces; writes are serialized by a lock."""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        config = get_config()
        self.logger = get_logger()
        if output_dir is None:
            output_dir = config.get_output_dir("reports_dir")
        self.output_dir = Path(output_dir)
        self.float_format = config.get("output.float_format", "%.17g")
        self.files: List[Path] = []
        self._lock = threading.Lock()

    def _target(self, filename: str) -> Path:
        path = validate_output_path(str(self.output_dir / filename))
        self.files.append(path)
        return path

    def write_json(self, filename: str, payload: Dict[str, Any], schema: str) -> Path:
        """Write payload with a leading {"schema": ...} key, sorted keys, LF endings."""
        document = {"schema": schema}
        document.update(to_jsonable(payload))
        text = json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"
        with self._lock:
            path = self._target(filename)
            path.write_text(text, encoding="utf-8", newline="\n")
        self.logger.debug(f"Wrote {path}")
        return path

    def write_csv(
        self, filename: str, rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None
    ) -> Path:
        """Comma separated, '.' decimal, header row, one line per record."""
        frame = pd.DataFrame([to_jsonable(row) for row in rows], columns=columns)
        with self._lock:
            path = self._target(filename)
            frame.to_csv(
                path, index=False, float_format=self.float_format, lineterminator="\n"
            )
        self.logger.debug(f"Wrote {path} ({len(frame)} rows)")
        return path


def read_report(path: Union[str, Path]) -> Union[Dict[str, Any], pd.DataFrame]:
    """
    Parse a report written by ReportWriter.

    Returns:
        dict for JSON reports, DataFrame for CSV reports

    Raises:
        ReportParseError: If the file is missing or malformed
    """
    path = Path(path)
    if not path.is_file():
        raise ReportParseError(f"Report not found: {path}")
    suffix = path.suffix.lower()
    try:
        if suffix == ".json":
            document = json.loads(path.read_text(encoding="utf-8"))
            if not isinstance(document, dict) or "schema" not in document:
                raise ReportParseError(f"{path} has no schema key")
            return from_jsonable(document)
        if suffix == ".csv":
            return pd.read_csv(path, float_precision="round_trip")
    except (json.JSONDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ReportParseError(f"Cannot parse {path}: {e}")
    raise ReportParseError(f"Unsupported report format: {path.suffix}")


def report_table(path: Union[str, Path]) -> pd.DataFrame:
    """Tabular view of a report: the CSV itself, or the 'rows' list of a JSON report."""
    report = read_report(path)
    if isinstance(report, pd.DataFrame):
        return report
    rows = report.get("rows")
    if not isinstance(rows, list):
        raise ReportParseError(f"{path} has no 'rows' table")
    return pd.DataFrame(rows)


@dataclass
class RunManifest:
    """Everything needed to reproduce one run, and the files it produced."""

    subcommand: str
    config: Dict[str, Any]
    version: str
    status: int = 0
    duration_seconds: float = 0.0
    counters: Dict[str, Any] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)
    error: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "version": self.version,
            "status": self.status,
            "duration_seconds": self.duration_seconds,
            "counters": self.counters,
            "files": self.files,
            "error": self.error,
        }

    def write(self, writer: ReportWriter, filename: str) -> Path:
        return writer.write_json(filename, self.to_dict(), schema="manifest/v1")
