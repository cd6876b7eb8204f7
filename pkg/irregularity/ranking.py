# Irregularity Profiler - Ranking
# Irregularity profiles, the persisted dataset bank and the ranking used to
# elect the primary and validation datasets

import hashlib
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from irregularity.core.config import get_settings
from irregularity.core.exceptions import (
    IntegrityError,
    IrregularityError,
    OutputError,
    ParameterError,
    ProfileError,
    UnsupportedVersionError,
    UsageError,
)
from irregularity.ingest import IngestReport, IngestSpec, ingest_bank
from irregularity.outliers import DEFAULT_FENCE_K, BoxStats, QuantileRule, box_stats
from irregularity.peaks import (
    IppdResult,
    PeakParams,
    PeakSet,
    default_candidates,
    default_delta,
    ippd_peaks,
    tune_lookahead,
)
from irregularity.series import TimeSeries

logger = structlog.get_logger(__name__)

CATALOG_VERSION = "bank-v1"

PeakSpec = Union[PeakParams, int, Sequence[int], None]


class RankKey(str, Enum):
    OUTLIER_COUNT = "outlier_count"
    OUTLIER_FRACTION = "outlier_fraction"
    PEAK_COUNT = "peak_count"
    PERIOD_CV = "period_cv"


class IrregularityProfile(BaseModel):
    """Outlier and peak-period evidence for one dataset"""

    model_config = ConfigDict(frozen=True)

    dataset_id: str
    n: int
    outlier_count: int
    outlier_fraction: float
    peak_count: int
    period_cv: float
    box: BoxStats
    ippd: IppdResult
    profiled_at: datetime
    params_digest: str


class BankEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_path: str
    ingest: Optional[IngestReport] = None
    profile: IrregularityProfile


class BankCatalog(BaseModel):
    """The dataset bank, keyed by dataset_id"""

    version: str = CATALOG_VERSION
    entries: Dict[str, BankEntry] = Field(default_factory=dict)

    def upsert(self, entry: BankEntry) -> None:
        self.entries[entry.profile.dataset_id] = entry

    def __len__(self) -> int:
        return len(self.entries)


class BankFailure(BaseModel):
    path: str
    dataset_id: str
    error: str
    exit_code: int


def params_digest(fence_k: float, quantile_rule: QuantileRule, delta: float, lookahead) -> str:
    """SHA-256 over the canonical JSON of every parameter a profile depends on"""
    payload = {
        "fence_k": fence_k,
        "quantile_rule": QuantileRule(quantile_rule).value,
        "delta": delta,
        "lookahead": lookahead,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def profile(
    series: TimeSeries,
    fence_k: float = DEFAULT_FENCE_K,
    peaks: PeakSpec = None,
    quantile_rule: QuantileRule = QuantileRule.INTERPOLATE,
    delta: Optional[float] = None,
    profiled_at: Optional[datetime] = None,
) -> IrregularityProfile:
    """Profile one series with box_stats and IPPD.

    Args:
        series: Series to profile
        fence_k: Tukey fence multiplier
        peaks: Fixed PeakParams, a single lookahead, or lookahead candidates
            to tune over; None tunes over the configured candidates that
            fit the series (no peaks when none fits)
        quantile_rule: Quartile estimator for the fences
        delta: Prominence when ``peaks`` is not a PeakParams; defaults to
            the scale-relative delta
        profiled_at: Timestamp to record (UTC now when omitted)

    Raises:
        ProfileError: any module error, tagged with the dataset id
    """
    try:
        box = box_stats(series, fence_k=fence_k, quantile_rule=quantile_rule)
        if not isinstance(peaks, PeakParams):
            if delta is None:
                delta = default_delta(series, get_settings().DELTA_FRACTION)
            elif not delta > 0:
                raise ParameterError(f"delta must be positive, got {delta}")

        if isinstance(peaks, PeakParams):
            ippd = ippd_peaks(series, peaks)
            lookahead = peaks.lookahead
        elif isinstance(peaks, int):
            if peaks < 1:
                raise ParameterError(f"lookahead must be >= 1, got {peaks}")
            ippd = ippd_peaks(series, PeakParams(delta=delta, lookahead=peaks))
            lookahead = peaks
        else:
            candidates = list(peaks) if peaks is not None else default_candidates(
                series, get_settings().lookahead_candidates
            )
            if peaks is None and not candidates:
                # no configured lookahead fits the series
                logger.warning("lookahead_untunable", dataset_id=series.id, n=len(series))
                ippd = IppdResult(
                    peaks=PeakSet(maxima=(), minima=(), params=PeakParams(delta=delta)), peak_count=0
                )
            else:
                ippd = tune_lookahead(series, delta, candidates)
            lookahead = sorted(set(candidates))
    except IrregularityError as exc:
        raise ProfileError(str(exc), dataset_id=series.id, cause=exc) from exc

    result = IrregularityProfile(
        dataset_id=series.id,
        n=box.n,
        outlier_count=box.outlier_count,
        outlier_fraction=box.outlier_count / box.n,
        peak_count=ippd.peak_count,
        period_cv=ippd.peaks.period_cv,
        box=box,
        ippd=ippd,
        profiled_at=profiled_at or datetime.now(timezone.utc),
        params_digest=params_digest(fence_k, quantile_rule, ippd.peaks.params.delta, lookahead),
    )
    logger.info(
        "series_profiled",
        dataset_id=result.dataset_id,
        outlier_count=result.outlier_count,
        peak_count=result.peak_count,
        period_cv=result.period_cv,
    )
    return result


def rank_bank(catalog: BankCatalog, key: RankKey = RankKey.OUTLIER_COUNT) -> List[str]:
    """dataset_ids, most irregular first; ties by outlier_fraction, then id"""
    if not catalog.entries:
        raise UsageError("cannot rank an empty catalog")

    attribute = RankKey(key).value

    def sort_key(dataset_id: str):
        entry_profile = catalog.entries[dataset_id].profile
        return (-getattr(entry_profile, attribute), -entry_profile.outlier_fraction, dataset_id)

    return sorted(catalog.entries, key=sort_key)


def select_candidates(
    catalog: BankCatalog, key: RankKey = RankKey.OUTLIER_COUNT
) -> Tuple[str, Optional[str]]:
    """(primary, validation): the head of the ranking and its runner-up"""
    ranked = rank_bank(catalog, key)
    return ranked[0], ranked[1] if len(ranked) > 1 else None


def _entries_digest(entries: Dict) -> str:
    canonical = json.dumps(entries, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_catalog(catalog: BankCatalog, path: Union[str, Path]) -> Path:
    """Write the catalog as versioned JSON with a content digest, atomically"""
    path = Path(path)
    entries = {
        dataset_id: catalog.entries[dataset_id].model_dump(mode="json")
        for dataset_id in sorted(catalog.entries)
    }
    document = {"version": catalog.version, "digest": _entries_digest(entries), "entries": entries}
    text = json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", dir=path.parent, prefix=f".{path.name}.", delete=False
        ) as handle:
            handle.write(text)
            temp_name = handle.name
        os.replace(temp_name, path)
    except OSError as exc:
        raise OutputError(f"cannot write catalog {path}: {exc}") from exc

    logger.info("catalog_saved", path=str(path), entries=len(entries))
    return path


def load_catalog(path: Union[str, Path]) -> BankCatalog:
    """Read and verify a catalog file.

    Raises:
        IntegrityError: unreadable, truncated, malformed or digest mismatch
        UnsupportedVersionError: unknown format version
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise IntegrityError(f"catalog {path} does not exist") from exc
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"catalog {path} is unreadable or truncated: {exc}") from exc

    if not isinstance(document, dict) or not {"version", "digest", "entries"} <= document.keys():
        raise IntegrityError(f"catalog {path} lacks version, digest or entries")
    if document["version"] != CATALOG_VERSION:
        raise UnsupportedVersionError(
            f"catalog {path} has version {document['version']!r}; supported: {CATALOG_VERSION}"
        )
    if not isinstance(document["entries"], dict) or _entries_digest(document["entries"]) != document["digest"]:
        raise IntegrityError(f"catalog {path} failed its digest check")

    try:
        catalog = BankCatalog(version=document["version"], entries=document["entries"])
    except ValidationError as exc:
        raise IntegrityError(f"catalog {path} has malformed entries: {exc}") from exc

    logger.debug("catalog_loaded", path=str(path), entries=len(catalog))
    return catalog


class BankBuild(BaseModel):
    """build_bank result; ``profiled`` follows the order of ``specs``"""

    catalog: BankCatalog
    failures: List[BankFailure] = Field(default_factory=list)
    profiled: List[Tuple[TimeSeries, IrregularityProfile]] = Field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return max((failure.exit_code for failure in self.failures), default=0)


def build_bank(
    specs: Sequence[IngestSpec],
    fence_k: float = DEFAULT_FENCE_K,
    peaks: PeakSpec = None,
    quantile_rule: QuantileRule = QuantileRule.INTERPOLATE,
    delta: Optional[float] = None,
    catalog: Optional[BankCatalog] = None,
    max_workers: Optional[int] = None,
) -> BankBuild:
    """Ingest and profile every spec into ``catalog`` (a new one by default).

    Files that fail to ingest or profile are reported, the rest are upserted.
    """
    build = BankBuild(catalog=catalog if catalog is not None else BankCatalog())
    outcomes = ingest_bank(specs, max_workers=max_workers)

    def run(outcome):
        if not outcome.ok:
            return outcome, outcome.error
        try:
            return outcome, profile(
                outcome.series, fence_k=fence_k, peaks=peaks, quantile_rule=quantile_rule, delta=delta
            )
        except ProfileError as exc:
            return outcome, exc

    workers = max_workers or get_settings().MAX_WORKERS
    with ThreadPoolExecutor(max_workers=min(workers, len(outcomes))) as executor:
        results = list(executor.map(run, outcomes))

    for outcome, result in results:
        if isinstance(result, IrregularityError):
            build.failures.append(
                BankFailure(
                    path=str(outcome.spec.path),
                    dataset_id=outcome.spec.series_id,
                    error=str(result),
                    exit_code=result.exit_code,
                )
            )
            continue
        build.catalog.upsert(
            BankEntry(source_path=str(outcome.spec.path), ingest=outcome.report, profile=result)
        )
        build.profiled.append((outcome.series, result))

    logger.info("bank_built", entries=len(build.catalog), failures=len(build.failures))
    return build
