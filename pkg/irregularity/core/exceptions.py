# Irregularity Profiler - Exceptions
# Error hierarchy shared by the library and the command-line boundary

from typing import Any, Optional


class IrregularityError(Exception):
    """Base class for every error raised by the profiler"""

    exit_code = 1


class UsageError(IrregularityError):
    """Invalid invocation: empty batches, empty candidate lists, empty catalogs"""

    exit_code = 2


class ParameterError(IrregularityError, ValueError):
    """A numeric parameter is outside its admissible range"""

    exit_code = 2


class BoundsError(IrregularityError, IndexError):
    """Slice indices outside the series"""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class IngestError(IrregularityError):
    """A dataset file could not be turned into a TimeSeries"""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        row: Optional[int] = None,
        reason: Optional[str] = None,
    ):
        super().__init__(message)
        self.path = path
        self.row = row
        self.reason = reason


class R2UndefinedError(IrregularityError):
    """R² is undefined for constant actuals; the partial report is attached"""

    def __init__(self, message: str, report: Any):
        super().__init__(message)
        self.report = report


class OutputError(IrregularityError):
    """A report, plot or export file could not be written"""


class IntegrityError(IrregularityError):
    """A catalog file is corrupt, truncated or fails its digest check"""


class UnsupportedVersionError(IrregularityError):
    """A catalog file declares a format version this build cannot read"""


class ProfileError(IrregularityError):
    """Profiling failed for one dataset"""

    def __init__(self, message: str, dataset_id: str, cause: Optional[Exception] = None):
        super().__init__(f"{dataset_id}: {message}")
        self.dataset_id = dataset_id
        self.cause = cause
        if cause is not None:
            self.exit_code = getattr(cause, "exit_code", 1)
