# Irregularity Profiler - Metrics
# Error metrics for predictions against actuals, complexity/efficiency and
# run-to-run stability

import math
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from irregularity.core.exceptions import IngestError, ParameterError, R2UndefinedError, UsageError
from irregularity.ingest import IngestSpec, ingest

logger = structlog.get_logger(__name__)


class RankBy(str, Enum):
    RMSE = "rmse"
    MAE = "mae"


class PredictionPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    actuals: Tuple[float, ...]
    predictions: Tuple[float, ...]

    @model_validator(mode="after")
    def check_lengths(self):
        if not self.actuals:
            raise ValueError("prediction pair is empty")
        if len(self.actuals) != len(self.predictions):
            raise ValueError(
                f"actuals ({len(self.actuals)}) and predictions ({len(self.predictions)}) differ in length"
            )
        for name, seq in (("actuals", self.actuals), ("predictions", self.predictions)):
            for position, value in enumerate(seq):
                if not math.isfinite(value):
                    raise ValueError(f"non-finite {name} value at position {position}")
        return self

    @property
    def n(self) -> int:
        return len(self.actuals)


class EvalReport(BaseModel):
    """mae/mse/rmse are lower-is-better; r2 is None when undefined.

    efficiency is exec_time_seconds / param_count (seconds per parameter,
    lower is better), present only when both inputs are.
    """

    model_config = ConfigDict(frozen=True)

    mae: float = Field(ge=0)
    mse: float = Field(ge=0)
    rmse: float = Field(ge=0)
    r2: Optional[float] = None
    n: int = Field(ge=1)
    param_count: Optional[int] = None
    exec_time_seconds: Optional[float] = None
    efficiency: Optional[float] = None

    @model_validator(mode="after")
    def check_efficiency(self):
        has_inputs = self.param_count is not None and self.exec_time_seconds is not None
        if has_inputs != (self.efficiency is not None):
            raise ValueError("efficiency requires both param_count and exec_time_seconds")
        return self


class StabilityReport(BaseModel):
    """Mean and sample standard deviation of each metric over repeated runs"""

    model_config = ConfigDict(frozen=True)

    runs: int
    mean: Dict[str, float]
    std: Dict[str, float]

    @field_validator("runs")
    @classmethod
    def validate_runs(cls, v):
        if v < 1:
            raise ValueError("runs must be >= 1")
        return v


def evaluate(
    pair: PredictionPair,
    param_count: Optional[int] = None,
    exec_time_seconds: Optional[float] = None,
) -> EvalReport:
    """Score predictions against actuals.

    Raises:
        ParameterError: non-positive param_count or exec_time_seconds
        R2UndefinedError: constant actuals; ``.report`` holds the other metrics
    """
    if param_count is not None and param_count <= 0:
        raise ParameterError(f"param_count must be positive, got {param_count}")
    if exec_time_seconds is not None and not exec_time_seconds > 0:
        raise ParameterError(f"exec_time_seconds must be positive, got {exec_time_seconds}")

    y = np.asarray(pair.actuals, dtype=float)
    y_hat = np.asarray(pair.predictions, dtype=float)
    residual = y - y_hat
    n = y.shape[0]

    mae = float(np.sum(np.abs(residual)) / n)
    mse = float(np.sum(np.power(residual, 2)) / n)
    rmse = math.sqrt(mse)

    efficiency = None
    if param_count is not None and exec_time_seconds is not None:
        efficiency = exec_time_seconds / param_count

    fields = dict(
        mae=mae,
        mse=mse,
        rmse=rmse,
        n=n,
        param_count=param_count,
        exec_time_seconds=exec_time_seconds,
        efficiency=efficiency,
    )

    ss_res = float(np.sum(np.power(residual, 2)))
    ss_tot = float(np.sum(np.power(y - np.mean(y), 2)))
    # spreads too small to square also leave r2 undefined
    if np.all(y == y[0]) or ss_tot == 0.0:
        report = EvalReport(r2=None, **fields)
        raise R2UndefinedError("r2 is undefined: actuals have zero variance", report=report)

    report = EvalReport(r2=1.0 - ss_res / ss_tot, **fields)

    logger.debug("predictions_evaluated", n=n, rmse=rmse, r2=report.r2)
    return report


def _rank_key(label: str, report: EvalReport, rank_by: RankBy):
    # undefined r2 ranks behind every defined one
    neg_r2 = -report.r2 if report.r2 is not None else math.inf
    if rank_by is RankBy.MAE:
        return (report.mae, report.rmse, neg_r2, label)
    return (report.rmse, report.mae, neg_r2, label)


def rank_reports(
    reports: Sequence[Tuple[str, EvalReport]], rank_by: RankBy = RankBy.RMSE
) -> List[str]:
    """Labels best-first: ascending rmse, then mae, then descending r2, then label.

    ``rank_by=RankBy.MAE`` swaps the first two keys.
    """
    if not reports:
        raise UsageError("rank_reports needs at least one report")
    sizes = {report.n for _, report in reports}
    if len(sizes) > 1:
        raise UsageError(f"reports cover different sample counts: {sorted(sizes)}")

    rank_by = RankBy(rank_by)
    ordered = sorted(reports, key=lambda item: _rank_key(item[0], item[1], rank_by))
    return [label for label, _ in ordered]


def stability(reports: Sequence[EvalReport]) -> StabilityReport:
    """Repeatability of a model over several runs (r2 over the runs where it is defined)"""
    if not reports:
        raise UsageError("stability needs at least one report")

    mean: Dict[str, float] = {}
    std: Dict[str, float] = {}
    for metric in ("mae", "mse", "rmse", "r2"):
        samples = np.asarray(
            [getattr(r, metric) for r in reports if getattr(r, metric) is not None], dtype=float
        )
        if samples.size == 0:
            continue
        mean[metric] = float(samples.mean())
        std[metric] = float(samples.std(ddof=1)) if samples.size > 1 else 0.0

    return StabilityReport(runs=len(reports), mean=mean, std=std)


def load_prediction_pair(actuals_spec: IngestSpec, predictions_spec: IngestSpec) -> PredictionPair:
    """Ingest actuals and predictions; their cleaned timestamps must match exactly."""
    actuals, _ = ingest(actuals_spec)
    predictions, _ = ingest(predictions_spec)
    if actuals.timestamps != predictions.timestamps:
        mismatch = next(
            (
                position
                for position, (a, b) in enumerate(zip(actuals.timestamps, predictions.timestamps))
                if a != b
            ),
            min(len(actuals), len(predictions)),
        )
        raise IngestError(
            f"{predictions_spec.path}: timestamps differ from {actuals_spec.path} at position {mismatch}",
            path=str(predictions_spec.path),
            reason="timestamp_mismatch",
        )
    return PredictionPair(actuals=actuals.values, predictions=predictions.values)
