# Irregularity Profiler - Series Core
# Domain types for sequential data and descriptive statistics over them

import math
from datetime import date
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, model_validator

from irregularity.core.exceptions import BoundsError, OutputError

logger = structlog.get_logger(__name__)

Timestamp = Union[date, int]


class TimeSeries(BaseModel):
    """Ordered (timestamp, value) observations with provenance.

    Timestamps are calendar dates or integer positions; calendar gaps are
    kept as they are; the algorithms only look at sequence position.
    Construction raises pydantic's ValidationError (a ValueError) when an
    invariant does not hold.
    """

    model_config = ConfigDict(frozen=True)

    id: str
    timestamps: Tuple[Timestamp, ...]
    values: Tuple[float, ...]
    source: str = ""

    @model_validator(mode="after")
    def check_invariants(self):
        if len(self.timestamps) != len(self.values):
            raise ValueError(
                f"timestamps ({len(self.timestamps)}) and values ({len(self.values)}) differ in length"
            )
        if not self.values:
            raise ValueError("a series needs at least one observation")

        kinds = {isinstance(ts, date) for ts in self.timestamps}
        if len(kinds) > 1:
            raise ValueError("timestamps mix calendar dates and integer indices")

        for position, (previous, current) in enumerate(zip(self.timestamps, self.timestamps[1:]), start=1):
            if not previous < current:
                raise ValueError(f"timestamps not strictly increasing at position {position}")

        for position, value in enumerate(self.values):
            if not math.isfinite(value):
                raise ValueError(f"non-finite value at position {position}")
        return self

    def __len__(self) -> int:
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def slice(self, start_index: int, end_index: int) -> "TimeSeries":
        """Sub-series [start_index, end_index) with the same id and source."""
        length = len(self.values)
        if start_index < 0 or start_index >= length:
            raise BoundsError(
                f"start_index {start_index} outside [0, {length})", index=start_index
            )
        if end_index > length:
            raise BoundsError(f"end_index {end_index} exceeds length {length}", index=end_index)
        if end_index <= start_index:
            raise BoundsError(
                f"end_index {end_index} must be greater than start_index {start_index}",
                index=end_index,
            )

        return TimeSeries(
            id=self.id,
            timestamps=self.timestamps[start_index:end_index],
            values=self.values[start_index:end_index],
            source=self.source,
        )

    def _csv_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "timestamp": [
                    ts.isoformat() if isinstance(ts, date) else str(ts) for ts in self.timestamps
                ],
                "value": [repr(float(v)) for v in self.values],
            }
        )

    def to_csv_text(self) -> str:
        return self._csv_frame().to_csv(index=False, lineterminator="\n")

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Export as `timestamp,value` CSV that ingest reads back value-identically."""
        path = Path(path)
        try:
            self._csv_frame().to_csv(path, index=False, lineterminator="\n")
        except OSError as exc:
            raise OutputError(f"cannot write series to {path}: {exc}") from exc

        logger.debug("series_exported", series_id=self.id, path=str(path), points=len(self))
        return path


class DescriptiveStats(BaseModel):
    """Exploratory summary of a series' values"""

    model_config = ConfigDict(frozen=True)

    count: int
    min: float
    max: float
    mean: float
    median: float
    std_dev: float
    range: float
    q1: float
    q3: float


def describe(series: TimeSeries) -> DescriptiveStats:
    """Exact descriptive statistics; quartiles use the interpolation rule of
    :func:`irregularity.outliers.quantile` so Q2 agrees everywhere."""
    from irregularity.outliers import quartiles

    values = series.array()
    count = int(values.size)
    q1, median, q3 = quartiles(series.values)
    minimum = float(values.min())
    maximum = float(values.max())

    return DescriptiveStats(
        count=count,
        min=minimum,
        max=maximum,
        mean=float(values.mean()),
        median=median,
        # sample standard deviation; a single observation has no spread
        std_dev=float(values.std(ddof=1)) if count > 1 else 0.0,
        range=maximum - minimum,
        q1=q1,
        q3=q3,
    )


def slice_series(series: TimeSeries, start_index: int, end_index: int) -> TimeSeries:
    return series.slice(start_index, end_index)
