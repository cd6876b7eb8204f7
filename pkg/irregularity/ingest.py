# Irregularity Profiler - Ingest
# Delimited-text parsing and the deterministic cleaning stage that turns a
# dataset file into a TimeSeries plus an audit report

import math
import re
import string
from concurrent.futures import ThreadPoolExecutor
from datetime import date, datetime
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
import structlog
from dateutil import parser as date_parser
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from irregularity.core.config import get_settings
from irregularity.core.exceptions import IngestError, IrregularityError, UsageError
from irregularity.series import TimeSeries

logger = structlog.get_logger(__name__)

Column = Union[int, str]

AUTO_DATE_FORMAT = "auto"
DEFAULT_DATE_FORMAT = "YYYY-MM-DD"

_DATE_TOKENS = {"YYYY": "%Y", "YY": "%y", "MM": "%m", "DD": "%d"}
_DATE_TOKEN_RE = re.compile("|".join(sorted(_DATE_TOKENS, key=len, reverse=True)))
_THOUSANDS_RE = re.compile(r"^[+-]?\d{1,3}(?:,\d{3})+(?:\.\d*)?$")
_NUMBER_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$")
_INTEGER_RE = re.compile(r"^[+-]?\d+$")
_NON_FINITE_WORDS = {"nan", "inf", "infinity"}


class MissingPolicy(str, Enum):
    DROP_ROW = "drop_row"
    FAIL = "fail"


class DropReason(str, Enum):
    EMPTY_TIMESTAMP = "empty_timestamp"
    UNPARSEABLE_TIMESTAMP = "unparseable_timestamp"
    EMPTY_VALUE = "empty_value"
    UNPARSEABLE_VALUE = "unparseable_value"
    NON_FINITE_VALUE = "non_finite_value"


class IngestSpec(BaseModel):
    """How to read one dataset file.

    date_format uses the pattern tokens YYYY, YY, MM and DD (anything else is
    literal), ``"auto"`` for ISO-8601 detection, or None for integer
    timestamps. Columns are header names or 0-based positions.
    """

    model_config = ConfigDict(frozen=True)

    path: Path
    timestamp_column: Column = 0
    value_column: Column = 1
    date_format: Optional[str] = DEFAULT_DATE_FORMAT
    missing_policy: MissingPolicy = MissingPolicy.DROP_ROW
    delimiter: str = ","
    has_header: bool = True
    dataset_id: Optional[str] = None

    @field_validator("delimiter")
    @classmethod
    def validate_delimiter(cls, v):
        if len(v) != 1 or v not in string.printable or v in "\r\n\x0b\x0c":
            raise ValueError("delimiter must be a single printable character")
        return v

    @field_validator("date_format")
    @classmethod
    def validate_date_format(cls, v):
        if v is not None and v != AUTO_DATE_FORMAT and not _DATE_TOKEN_RE.search(v):
            raise ValueError(f"date_format {v!r} has no YYYY, YY, MM or DD token")
        return v

    @model_validator(mode="after")
    def validate_columns(self):
        if self.timestamp_column == self.value_column:
            raise ValueError("timestamp_column and value_column must differ")
        if not self.has_header:
            for column in (self.timestamp_column, self.value_column):
                if not isinstance(column, int):
                    raise ValueError(f"column {column!r} must be a position when has_header is false")
        return self

    @property
    def series_id(self) -> str:
        return self.dataset_id or str(self.path)


class IngestReport(BaseModel):
    rows_read: int = Field(ge=0)
    rows_kept: int = Field(ge=0)
    rows_dropped: int = Field(ge=0)
    dropped_reasons: Dict[str, int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_totals(self):
        if self.rows_read != self.rows_kept + self.rows_dropped:
            raise ValueError("rows_read must equal rows_kept + rows_dropped")
        if sum(self.dropped_reasons.values()) != self.rows_dropped:
            raise ValueError("dropped_reasons must add up to rows_dropped")
        return self


class IngestOutcome(BaseModel):
    """One ingest_bank result: either series and report, or the error"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: IngestSpec
    series: Optional[TimeSeries] = None
    report: Optional[IngestReport] = None
    error: Optional[IrregularityError] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def strptime_pattern(date_format: str) -> str:
    """Translate the YYYY/MM/DD mini-language into a strptime pattern.

    >>> strptime_pattern("DD/MM/YYYY")
    '%d/%m/%Y'
    """
    escaped = date_format.replace("%", "%%")
    return _DATE_TOKEN_RE.sub(lambda match: _DATE_TOKENS[match.group(0)], escaped)


class _RowError(Exception):
    def __init__(self, reason: DropReason):
        super().__init__(reason.value)
        self.reason = reason


def _cell(raw) -> str:
    # short rows come back from pandas as NaN
    return raw.strip() if isinstance(raw, str) else ""


def parse_value(text: str) -> float:
    text = text.strip()
    if not text:
        raise _RowError(DropReason.EMPTY_VALUE)
    if _THOUSANDS_RE.match(text):
        text = text.replace(",", "")
    if text.lstrip("+-").lower() in _NON_FINITE_WORDS:
        raise _RowError(DropReason.NON_FINITE_VALUE)
    if not _NUMBER_RE.match(text):
        raise _RowError(DropReason.UNPARSEABLE_VALUE)
    value = float(text)
    if not math.isfinite(value):
        raise _RowError(DropReason.NON_FINITE_VALUE)
    return value


def _timestamp_parser(date_format: Optional[str]):
    if date_format is None:

        def parse(text: str) -> int:
            if not _INTEGER_RE.match(text):
                raise ValueError(text)
            return int(text)

        return parse

    if date_format == AUTO_DATE_FORMAT:
        return lambda text: date_parser.isoparse(text).date()

    pattern = strptime_pattern(date_format)
    return lambda text: datetime.strptime(text, pattern).date()


def _read_frame(spec: IngestSpec) -> pd.DataFrame:
    path = spec.path
    if not path.is_file():
        raise IngestError(f"file not found: {path}", path=str(path), reason="file_not_found")
    try:
        return pd.read_csv(
            path,
            sep=spec.delimiter,
            header=0 if spec.has_header else None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
        )
    except pd.errors.EmptyDataError as exc:
        raise IngestError(f"{path} is empty", path=str(path), reason="empty_file") from exc
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise IngestError(f"{path} is not valid delimited text: {exc}", path=str(path), reason="malformed_file") from exc
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}", path=str(path), reason="unreadable_file") from exc


def _column(frame: pd.DataFrame, column: Column, spec: IngestSpec, role: str) -> pd.Series:
    if isinstance(column, int):
        if not 0 <= column < frame.shape[1]:
            raise IngestError(
                f"{role} column index {column} out of range ({frame.shape[1]} columns) in {spec.path}",
                path=str(spec.path),
                reason="missing_column",
            )
        return frame.iloc[:, column]
    if column not in frame.columns:
        raise IngestError(
            f"{role} column {column!r} not found in {spec.path}; columns: {list(frame.columns)}",
            path=str(spec.path),
            reason="missing_column",
        )
    return frame[column]


def ingest(spec: IngestSpec) -> Tuple[TimeSeries, IngestReport]:
    """Read, clean and validate one dataset file.

    Bad rows are dropped or abort the run according to ``spec.missing_policy``;
    rows are sorted by timestamp and duplicate timestamps are rejected.
    """
    frame = _read_frame(spec)
    # blank lines stay in the frame so row numbers match the file
    blank = frame.isna().all(axis=1)
    timestamps_raw = _column(frame, spec.timestamp_column, spec, "timestamp")
    values_raw = _column(frame, spec.value_column, spec, "value")
    parse_timestamp = _timestamp_parser(spec.date_format)
    first_line = 2 if spec.has_header else 1

    rows: List[Tuple[Union[date, int], float, int]] = []
    dropped: Dict[str, int] = {}
    for offset, (ts_raw, value_raw, is_blank) in enumerate(zip(timestamps_raw, values_raw, blank)):
        if is_blank:
            continue
        line = first_line + offset
        try:
            ts_text = _cell(ts_raw)
            if not ts_text:
                raise _RowError(DropReason.EMPTY_TIMESTAMP)
            try:
                timestamp = parse_timestamp(ts_text)
            except (ValueError, OverflowError) as exc:
                raise _RowError(DropReason.UNPARSEABLE_TIMESTAMP) from exc
            value = parse_value(_cell(value_raw))
        except _RowError as bad_row:
            reason = bad_row.reason.value
            if spec.missing_policy is MissingPolicy.FAIL:
                raise IngestError(
                    f"{spec.path}: row {line}: {reason}", path=str(spec.path), row=line, reason=reason
                ) from None
            dropped[reason] = dropped.get(reason, 0) + 1
            continue
        rows.append((timestamp, value, line))

    if not rows:
        raise IngestError(f"{spec.path}: no rows kept after cleaning", path=str(spec.path), reason="no_rows")

    rows.sort(key=lambda row: row[0])
    for previous, current in zip(rows, rows[1:]):
        if previous[0] == current[0]:
            raise IngestError(
                f"{spec.path}: duplicate timestamp {current[0]} at rows {previous[2]} and {current[2]}",
                path=str(spec.path),
                row=current[2],
                reason="duplicate_timestamp",
            )

    rows_read = int((~blank).sum())
    report = IngestReport(
        rows_read=rows_read,
        rows_kept=len(rows),
        rows_dropped=rows_read - len(rows),
        dropped_reasons=dict(sorted(dropped.items())),
    )
    series = TimeSeries(
        id=spec.series_id,
        timestamps=tuple(row[0] for row in rows),
        values=tuple(row[1] for row in rows),
        source=str(spec.path),
    )

    if report.rows_dropped:
        logger.warning(
            "rows_dropped", path=str(spec.path), rows_dropped=report.rows_dropped, reasons=report.dropped_reasons
        )
    logger.info("series_ingested", series_id=series.id, rows_read=report.rows_read, rows_kept=report.rows_kept)
    return series, report


def _ingest_one(spec: IngestSpec) -> IngestOutcome:
    try:
        series, report = ingest(spec)
    except IrregularityError as exc:
        logger.warning("ingest_failed", path=str(spec.path), error=str(exc))
        return IngestOutcome(spec=spec, error=exc)
    except ValidationError as exc:
        error = IngestError(f"{spec.path}: {exc}", path=str(spec.path), reason="invalid_series")
        return IngestOutcome(spec=spec, error=error)
    return IngestOutcome(spec=spec, series=series, report=report)


def ingest_bank(specs: Sequence[IngestSpec], max_workers: Optional[int] = None) -> List[IngestOutcome]:
    """Ingest several files concurrently; results follow ``specs`` order and
    per-file failures are returned, not raised."""
    if not specs:
        raise UsageError("ingest_bank needs at least one spec")

    workers = max_workers or get_settings().MAX_WORKERS
    with ThreadPoolExecutor(max_workers=min(workers, len(specs))) as executor:
        outcomes = list(executor.map(_ingest_one, specs))

    logger.info(
        "bank_ingested",
        files=len(outcomes),
        failed=sum(1 for outcome in outcomes if not outcome.ok),
    )
    return outcomes
