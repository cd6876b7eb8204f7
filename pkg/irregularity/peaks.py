# Irregularity Profiler - Peak Detection
# Billauer's delta scan, its look-ahead (IPPD) variant, inter-peak period
# statistics and the look-ahead tuner

import operator
from collections import deque
from typing import Deque, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, ConfigDict, Field

from irregularity.core.config import DEFAULT_LOOKAHEAD_CANDIDATES
from irregularity.core.exceptions import ParameterError, UsageError
from irregularity.series import TimeSeries

logger = structlog.get_logger(__name__)

DEFAULT_DELTA_FRACTION = 0.05


class PeakParams(BaseModel):
    """delta: reversal that confirms an extremum; lookahead: window of
    following samples the extremum must dominate and reverse within."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(gt=0)
    lookahead: int = Field(default=1, ge=1)


class PeakSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    maxima: Tuple[Tuple[int, float], ...]
    minima: Tuple[Tuple[int, float], ...]
    params: PeakParams
    periods: Tuple[int, ...] = ()
    period_mean: float = 0.0
    period_std: float = 0.0
    period_cv: float = 0.0

    @property
    def peak_count(self) -> int:
        return len(self.maxima) + len(self.minima)


class IppdResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    peaks: PeakSet
    peak_count: int
    tuned: bool = False
    lookahead_sweep: Optional[Tuple[Tuple[int, int], ...]] = None


def _fall_eligible(signal: Sequence[float], delta: float) -> np.ndarray:
    """Points followed by a fall of more than ``delta`` before anything
    higher. Pending points form a non-increasing deque."""
    eligible = np.zeros(len(signal), dtype=bool)
    pending: Deque[int] = deque()
    for index, x in enumerate(signal):
        while pending and x < signal[pending[0]] - delta:
            eligible[pending.popleft()] = True
        while pending and signal[pending[-1]] < x:
            pending.pop()
        if index:
            pending.append(index)
    return eligible


def _window_eligible(signal: np.ndarray, delta: float, lookahead: int) -> np.ndarray:
    """Points that dominate the next ``lookahead`` samples and see a fall of
    at least ``delta`` among them; points without a full window are skipped."""
    eligible = np.zeros(signal.size, dtype=bool)
    windows = sliding_window_view(signal[1:], lookahead)
    head = signal[: len(windows)]
    eligible[: len(windows)] = (windows.max(axis=1) <= head) & (windows.min(axis=1) <= head - delta)
    eligible[0] = False
    return eligible


def _alternate(
    signals: Dict[int, Sequence[float]], eligible: Dict[int, np.ndarray], delta: float, strict: bool
) -> List[Tuple[int, int]]:
    """Greedy alternation over eligible points as (index, sign) pivots.

    Sample 0 anchors the scan: the first pivot must clear it by ``delta``.
    A candidate is displaced only by a strictly more extreme point of its
    own kind and is committed once an opposite point clears it by ``delta``.
    """
    clears = operator.gt if strict else operator.ge
    kinds = np.where(eligible[1], 1, np.where(eligible[-1], -1, 0))
    pivots: List[Tuple[int, int]] = []
    candidate: Optional[Tuple[int, int]] = None

    for index in np.flatnonzero(kinds).tolist():
        sign = int(kinds[index])
        signal = signals[sign]
        if candidate is None:
            if clears(signal[index], signal[0] + delta):
                candidate = (index, sign)
        elif sign == candidate[1]:
            if signal[index] > signal[candidate[0]]:
                candidate = (index, sign)
        elif clears(signal[index], signal[candidate[0]] + delta):
            pivots.append(candidate)
            candidate = (index, sign)

    if candidate is not None:
        pivots.append(candidate)
    return pivots


def _scan(values: Sequence[float], delta: float, lookahead: Optional[int]) -> List[Tuple[int, int]]:
    """Extrema as (index, sign), sign +1 for maxima and -1 for minima.

    ``lookahead=None`` is the classic delta scan; otherwise each extremum is
    confirmed inside its own window. Minima run on the negated signal, so
    negating the input swaps maxima and minima exactly.
    """
    signals = {1: [float(v) for v in values], -1: [-float(v) for v in values]}
    if lookahead is None:
        eligible = {sign: _fall_eligible(signal, delta) for sign, signal in signals.items()}
    else:
        eligible = {
            sign: _window_eligible(np.asarray(signal), delta, lookahead) for sign, signal in signals.items()
        }
    return _alternate(signals, eligible, delta, strict=lookahead is None)


def period_stats(peaks: PeakSet) -> Tuple[float, float, float]:
    """(mean, std, cv) of the gaps between consecutive maxima.

    std is the sample standard deviation; (0, 0, 0) below two maxima.
    """
    return _period_stats(_periods(peaks.maxima))


def _periods(maxima: Sequence[Tuple[int, float]]) -> Tuple[int, ...]:
    indices = [index for index, _ in maxima]
    return tuple(b - a for a, b in zip(indices, indices[1:]))


def _period_stats(periods: Sequence[int]) -> Tuple[float, float, float]:
    if not periods:
        return 0.0, 0.0, 0.0
    gaps = np.asarray(periods, dtype=float)
    mean = float(gaps.mean())
    std = float(gaps.std(ddof=1)) if gaps.size > 1 else 0.0
    return mean, std, std / mean


def _peak_set(series: TimeSeries, params: PeakParams, windowed: bool = True) -> PeakSet:
    values = series.values
    pivots = _scan(values, params.delta, params.lookahead if windowed else None)
    maxima = tuple((index, values[index]) for index, sign in pivots if sign > 0)
    minima = tuple((index, values[index]) for index, sign in pivots if sign < 0)
    periods = _periods(maxima)
    mean, std, cv = _period_stats(periods)
    return PeakSet(
        maxima=maxima,
        minima=minima,
        params=params,
        periods=periods,
        period_mean=mean,
        period_std=std,
        period_cv=cv,
    )


def _check_delta(delta: float) -> None:
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")


def billauer_peaks(series: TimeSeries, delta: float) -> PeakSet:
    """Classic delta scan: an extremum is confirmed by a later fall (rise) of
    more than ``delta`` before the signal passes it. ``params.lookahead`` is
    recorded as 1 and not used."""
    _check_delta(delta)
    peaks = _peak_set(series, PeakParams(delta=delta, lookahead=1), windowed=False)
    logger.debug(
        "billauer_peaks_detected",
        series_id=series.id,
        delta=delta,
        maxima=len(peaks.maxima),
        minima=len(peaks.minima),
    )
    return peaks


def ippd_peaks(series: TimeSeries, params: PeakParams) -> IppdResult:
    """Look-ahead scan: an extremum must dominate the next ``params.lookahead``
    samples and fall (rise) by at least ``params.delta`` within them. The
    last ``lookahead`` samples have no full window and are never extrema."""
    _check_delta(params.delta)
    if params.lookahead < 1:
        raise ParameterError(f"lookahead must be >= 1, got {params.lookahead}")
    if len(series) < params.lookahead + 1:
        raise ParameterError(
            f"series {series.id} has {len(series)} points; lookahead {params.lookahead} "
            f"needs at least {params.lookahead + 1}"
        )

    peaks = _peak_set(series, params)
    return IppdResult(peaks=peaks, peak_count=peaks.peak_count, tuned=False)


def tune_lookahead(series: TimeSeries, delta: float, candidates: Iterable[int]) -> IppdResult:
    """Run ippd_peaks for every candidate and keep the one with the most
    peaks; ties go to the smallest lookahead."""
    candidates = sorted(set(candidates))
    if not candidates:
        raise UsageError("lookahead candidate list is empty")
    _check_delta(delta)
    for candidate in candidates:
        if candidate < 1 or candidate >= len(series):
            raise ParameterError(
                f"lookahead candidate {candidate} outside [1, {len(series)}) for series {series.id}"
            )

    results = [ippd_peaks(series, PeakParams(delta=delta, lookahead=c)) for c in candidates]
    sweep = tuple((c, r.peak_count) for c, r in zip(candidates, results))
    best = max(results, key=lambda r: (r.peak_count, -r.peaks.params.lookahead))

    logger.info(
        "lookahead_tuned",
        series_id=series.id,
        delta=delta,
        lookahead=best.peaks.params.lookahead,
        peak_count=best.peak_count,
        candidates=len(candidates),
    )
    return best.model_copy(update={"tuned": True, "lookahead_sweep": sweep})


def default_delta(series: TimeSeries, fraction: float = DEFAULT_DELTA_FRACTION) -> float:
    """fraction x (max - min); a constant series falls back to ``fraction``."""
    values = series.values
    delta = fraction * (max(values) - min(values))
    return delta if delta > 0 else fraction


def default_candidates(
    series: TimeSeries, candidates: Sequence[int] = tuple(DEFAULT_LOOKAHEAD_CANDIDATES)
) -> List[int]:
    """Candidates usable on this series (each shorter than the series)."""
    return sorted(c for c in set(candidates) if 1 <= c < len(series))
