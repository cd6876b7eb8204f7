# Irregularity Profiler - Outlier IQR
# Five-number summary, Tukey fences and the outlier count used as the
# primary irregularity measure

from __future__ import annotations

import math
from enum import Enum
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Tuple

import structlog
from pydantic import BaseModel, ConfigDict

from irregularity.core.exceptions import ParameterError

if TYPE_CHECKING:
    from irregularity.series import TimeSeries

logger = structlog.get_logger(__name__)

DEFAULT_FENCE_K = 1.5


class QuantileRule(str, Enum):
    INTERPOLATE = "interpolate"
    TUKEY_HINGE = "tukey_hinge"


class BoxStats(BaseModel):
    """Box-and-whisker summary of one series.

    Outliers lie strictly below ``lower_fence`` or strictly above
    ``upper_fence``; a value equal to a fence is inside.
    """

    model_config = ConfigDict(frozen=True)

    q1: float
    q2: float
    q3: float
    iqr: float
    lower_fence: float
    upper_fence: float
    outlier_indices: Tuple[int, ...]
    outlier_count: int
    n: int
    fence_k: float
    quantile_rule: QuantileRule = QuantileRule.INTERPOLATE
    minimum: float
    maximum: float
    whisker_low: Optional[float] = None
    whisker_high: Optional[float] = None


class FenceSweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    quantile_rule: QuantileRule
    fence_k: float
    outlier_count: int
    outlier_fraction: float


def _sorted_finite(values: Iterable[float]) -> List[float]:
    data = sorted(float(v) for v in values)
    if not data:
        raise ParameterError("quantile of an empty sample is undefined")
    if not (math.isfinite(data[0]) and math.isfinite(data[-1])) or any(math.isnan(v) for v in data):
        raise ParameterError("quantile input must be finite")
    return data


def _interpolate(data: Sequence[float], h: float) -> float:
    # data is sorted; h is a fractional 0-based position
    i = math.floor(h)
    if i + 1 >= len(data):
        return data[-1]
    return data[i] + (h - i) * (data[i + 1] - data[i])


def _tukey_hinges(data: Sequence[float]) -> Tuple[float, float, float]:
    # medians of the two halves, the median belonging to both halves
    n = len(data)
    i = (n + 1) // 4
    m = n // 2
    if n % 4 in (0, 3):
        q1 = (data[i] + data[i - 1]) / 2
        q3 = (data[-i - 1] + data[-i]) / 2
    else:
        q1 = data[i]
        q3 = data[-i - 1]
    if n % 2 == 0:
        q2 = (data[m - 1] + data[m]) / 2
    else:
        q2 = data[m]
    return q1, q2, q3


def quantile(values: Iterable[float], p: float) -> float:
    """p-quantile by linear interpolation at position h = (n - 1) * p of the
    sorted sample.

    >>> quantile([1, 2, 3, 4], 0.5)
    2.5
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    data = _sorted_finite(values)
    return _interpolate(data, (len(data) - 1) * p)


def quartiles(
    values: Iterable[float], rule: QuantileRule = QuantileRule.INTERPOLATE
) -> Tuple[float, float, float]:
    """(Q1, Q2, Q3) under the chosen rule"""
    data = _sorted_finite(values)
    if QuantileRule(rule) is QuantileRule.TUKEY_HINGE:
        return _tukey_hinges(data)
    h = len(data) - 1
    return (
        _interpolate(data, h * 0.25),
        _interpolate(data, h * 0.5),
        _interpolate(data, h * 0.75),
    )


def box_stats(
    series: "TimeSeries",
    fence_k: float = DEFAULT_FENCE_K,
    quantile_rule: QuantileRule = QuantileRule.INTERPOLATE,
) -> BoxStats:
    """Quartiles, IQR, fences and outlier positions for ``series``.

    Args:
        series: Series to summarise (raw values, no transformation)
        fence_k: Fence multiplier, 1.5 for Tukey's classic fences
        quantile_rule: Quartile estimator

    Returns:
        BoxStats with outlier_indices ascending
    """
    if not fence_k > 0:
        raise ParameterError(f"fence_k must be positive, got {fence_k}")

    rule = QuantileRule(quantile_rule)
    values = series.values
    q1, q2, q3 = quartiles(values, rule)
    iqr = q3 - q1
    lower_fence = q1 - fence_k * iqr
    upper_fence = q3 + fence_k * iqr

    outlier_indices = tuple(
        index for index, value in enumerate(values) if value < lower_fence or value > upper_fence
    )
    inside = [value for value in values if lower_fence <= value <= upper_fence]

    stats = BoxStats(
        q1=q1,
        q2=q2,
        q3=q3,
        iqr=iqr,
        lower_fence=lower_fence,
        upper_fence=upper_fence,
        outlier_indices=outlier_indices,
        outlier_count=len(outlier_indices),
        n=len(values),
        fence_k=fence_k,
        quantile_rule=rule,
        minimum=min(values),
        maximum=max(values),
        whisker_low=min(inside) if inside else None,
        whisker_high=max(inside) if inside else None,
    )

    logger.debug(
        "box_stats_computed",
        series_id=series.id,
        n=stats.n,
        outlier_count=stats.outlier_count,
        fence_k=fence_k,
        quantile_rule=rule.value,
    )
    return stats


def irregularity_fraction(stats: BoxStats) -> float:
    """Share of observations flagged as outliers, in [0, 1]"""
    return stats.outlier_count / stats.n


def fence_sweep(
    series: "TimeSeries",
    fence_ks: Sequence[float] = (1.0, 1.5, 2.0, 3.0),
    rules: Sequence[QuantileRule] = (QuantileRule.INTERPOLATE, QuantileRule.TUKEY_HINGE),
) -> List[FenceSweepRow]:
    """Outlier counts for every (rule, fence_k) pair, rule-major order"""
    rows = []
    for rule in rules:
        for fence_k in fence_ks:
            stats = box_stats(series, fence_k=fence_k, quantile_rule=rule)
            rows.append(
                FenceSweepRow(
                    quantile_rule=QuantileRule(rule),
                    fence_k=fence_k,
                    outlier_count=stats.outlier_count,
                    outlier_fraction=irregularity_fraction(stats),
                )
            )
    return rows
