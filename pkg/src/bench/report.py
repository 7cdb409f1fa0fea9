from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd

from ..exceptions.handler import FileOperationError
from ..states.records import MetricsRecord, StudyRecord
from ..utils.logging import get_logger
from .summary import SummaryRow

logger = get_logger("bench.report")

RECORDS_FILE = "records.jsonl"
SUMMARY_FILE = "summary.csv"
PLOT_FILE = "plot_error_vs_level.csv"
STUDIES_FILE = "studies.jsonl"

SUMMARY_COLUMNS = ["method", "level", "mean_error", "std_error", "mean_idem", "overhead"]
PLOT_COLUMNS = ["method", "batch_size", "level", "severity", "mean_error", "std_error"]


def method_label(row: SummaryRow, multiple_batch_sizes: bool) -> str:
    return f"{row.method}@bs{row.batch_size}" if multiple_batch_sizes else row.method


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise FileOperationError(f"Cannot write '{path}': {e}", str(path)) from e


def _write_csv(path: Path, frame: pd.DataFrame) -> None:
    try:
        frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    except OSError as e:
        raise FileOperationError(f"Cannot write '{path}': {e}", str(path)) from e


def emit_report(
    summary: Sequence[SummaryRow],
    records: Sequence[MetricsRecord],
    path: Union[str, Path],
    studies: Optional[Sequence[StudyRecord]] = None
) -> Dict[str, str]:
    """
    Write the run's artifacts into the directory `path`.

    Files: records.jsonl (one MetricsRecord per line), summary.csv,
    plot_error_vs_level.csv and, when studies are given, studies.jsonl.

    Returns:
        Mapping of artifact kind to file path
    """
    out_dir = Path(path)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise FileOperationError(f"Cannot create output directory: {e}", str(out_dir)) from e

    files = {}

    records_path = out_dir / RECORDS_FILE
    _write_text(records_path, "".join(record.model_dump_json() + "\n" for record in records))
    files["records"] = str(records_path)

    multiple = len({row.batch_size for row in summary}) > 1
    summary_frame = pd.DataFrame(
        [
            {
                "method": method_label(row, multiple),
                "level": row.level,
                "mean_error": row.mean_error,
                "std_error": row.std_error,
                "mean_idem": row.mean_idem,
                "overhead": row.overhead
            }
            for row in summary
        ],
        columns=SUMMARY_COLUMNS
    )
    summary_path = out_dir / SUMMARY_FILE
    _write_csv(summary_path, summary_frame)
    files["summary"] = str(summary_path)

    plot_frame = pd.DataFrame([{c: getattr(row, c) for c in PLOT_COLUMNS} for row in summary], columns=PLOT_COLUMNS)
    plot_path = out_dir / PLOT_FILE
    _write_csv(plot_path, plot_frame)
    files["plot_error_vs_level"] = str(plot_path)

    if studies is not None:
        studies_path = out_dir / STUDIES_FILE
        _write_text(studies_path, "".join(study.model_dump_json() + "\n" for study in studies))
        files["studies"] = str(studies_path)

    logger.info(f"Wrote {len(records)} record(s) and {len(summary)} summary row(s) to {out_dir}")
    return files


def read_records(path: Union[str, Path]) -> List[MetricsRecord]:
    """Parse a records.jsonl file (or the directory holding one)."""
    path = Path(path)
    if path.is_dir():
        path = path / RECORDS_FILE
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FileOperationError(f"Cannot read '{path}': {e}", str(path)) from e
    return [MetricsRecord.model_validate_json(line) for line in lines if line.strip()]


def read_studies(path: Union[str, Path]) -> List[StudyRecord]:
    path = Path(path)
    if path.is_dir():
        path = path / STUDIES_FILE
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FileOperationError(f"Cannot read '{path}': {e}", str(path)) from e
    return [StudyRecord.model_validate_json(line) for line in lines if line.strip()]
