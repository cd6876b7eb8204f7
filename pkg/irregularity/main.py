# Irregularity Profiler - Command Line
# click entry point: ingest, profile, peaks, rank, evaluate and report

import json
import re
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import click
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from irregularity import __version__
from irregularity.core.config import get_settings
from irregularity.core.exceptions import IrregularityError, OutputError, R2UndefinedError, UsageError
from irregularity.core.logging import configure_logging
from irregularity.ingest import DEFAULT_DATE_FORMAT, IngestSpec, MissingPolicy, ingest
from irregularity.metrics import RankBy, evaluate, load_prediction_pair, rank_reports
from irregularity.outliers import QuantileRule
from irregularity.peaks import PeakParams, default_candidates, default_delta, ippd_peaks, tune_lookahead
from irregularity.plotting import emit_boxplot, emit_plot
from irregularity.ranking import (
    BankCatalog,
    RankKey,
    build_bank,
    load_catalog,
    rank_bank,
    save_catalog,
    select_candidates,
)
from irregularity.series import describe

logger = structlog.get_logger(__name__)

AUTO_LOOKAHEAD = "auto"


class Command(str, Enum):
    INGEST = "ingest"
    PROFILE = "profile"
    PEAKS = "peaks"
    RANK = "rank"
    EVALUATE = "evaluate"
    REPORT = "report"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    PLOT = "plot"


COMMAND_FORMATS = {
    Command.INGEST: {OutputFormat.JSON, OutputFormat.CSV},
    Command.PROFILE: {OutputFormat.JSON, OutputFormat.PLOT},
    Command.PEAKS: {OutputFormat.JSON, OutputFormat.PLOT},
    Command.RANK: {OutputFormat.JSON},
    Command.EVALUATE: {OutputFormat.JSON},
    Command.REPORT: {OutputFormat.JSON, OutputFormat.CSV},
}

FLAGS = {
    "inputs": "--input",
    "output": "--output",
    "fence_k": "--fence-k",
    "delta": "--delta",
    "lookahead": "--lookahead",
    "quantile_rule": "--quantile-rule",
    "format": "--format",
    "dataset_ids": "--dataset-id",
    "timestamp_column": "--ts-col",
    "value_column": "--value-col",
    "date_format": "--date-format",
    "delimiter": "--delimiter",
    "missing_policy": "--missing-policy",
}

REPORT_COLUMNS = [
    "dataset_id",
    "source_path",
    "n",
    "outlier_count",
    "outlier_fraction",
    "peak_count",
    "period_cv",
    "delta",
    "lookahead",
    "rows_read",
    "rows_kept",
    "rows_dropped",
    "params_digest",
    "profiled_at",
]


class CliConfig(BaseModel):
    """Validated command-line flags; built before any file is touched"""

    model_config = ConfigDict(frozen=True)

    command: Command
    inputs: Tuple[Path, ...] = ()
    output: Optional[Path] = None
    fence_k: float = 1.5
    delta: Optional[float] = None
    lookahead: Union[int, str] = AUTO_LOOKAHEAD
    quantile_rule: QuantileRule = QuantileRule.INTERPOLATE
    format: OutputFormat = OutputFormat.JSON
    dataset_ids: Tuple[str, ...] = ()

    @field_validator("fence_k")
    @classmethod
    def validate_fence_k(cls, v):
        if not v > 0:
            raise ValueError("must be positive")
        return v

    @field_validator("delta")
    @classmethod
    def validate_delta(cls, v):
        if v is not None and not v > 0:
            raise ValueError("must be positive")
        return v

    @field_validator("lookahead", mode="before")
    @classmethod
    def parse_lookahead(cls, v):
        if isinstance(v, str):
            text = v.strip().lower()
            if text == AUTO_LOOKAHEAD:
                return AUTO_LOOKAHEAD
            if not text.isdigit():
                raise ValueError(f"expected a positive integer or 'auto', got {v!r}")
            v = int(text)
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @model_validator(mode="after")
    def validate_combination(self):
        if self.format not in COMMAND_FORMATS[self.command]:
            allowed = sorted(f.value for f in COMMAND_FORMATS[self.command])
            raise ValueError(f"format {self.format.value!r} not supported by {self.command.value}; use {allowed}")
        if self.format is OutputFormat.PLOT and self.output is None:
            raise ValueError("plot output needs --output")
        if self.dataset_ids and len(self.dataset_ids) != len(self.inputs):
            raise ValueError("give one --dataset-id per --input")
        return self

    @property
    def peaks(self) -> Optional[int]:
        """None tunes over the candidate set; an int fixes the lookahead"""
        return None if self.lookahead == AUTO_LOOKAHEAD else self.lookahead


def _usage_error(exc: ValidationError) -> UsageError:
    error = exc.errors()[0]
    location = error["loc"][0] if error["loc"] else None
    flag = FLAGS.get(location, "flags")
    return UsageError(f"invalid {flag}: {error['msg']}")


def _config(command: Command, **flags) -> CliConfig:
    settings = get_settings()
    defaults = {
        "fence_k": settings.FENCE_K,
        "delta": settings.DELTA,
        "quantile_rule": settings.QUANTILE_RULE,
    }
    for name, value in defaults.items():
        if flags.get(name) is None:
            flags[name] = value
    try:
        return CliConfig(command=command, **flags)
    except ValidationError as exc:
        raise _usage_error(exc) from None


def _column(text: str) -> Union[int, str]:
    return int(text) if text.isdigit() else text


def _ingest_spec(
    path: Path,
    ts_col: str,
    value_col: str,
    date_format: str,
    missing_policy: str,
    delimiter: str,
    no_header: bool,
    dataset_id: Optional[str] = None,
) -> IngestSpec:
    try:
        return IngestSpec(
            path=path,
            timestamp_column=_column(ts_col),
            value_column=_column(value_col),
            date_format=None if date_format.lower() == "none" else date_format,
            missing_policy=missing_policy,
            delimiter="\t" if delimiter == "\\t" else delimiter,
            has_header=not no_header,
            dataset_id=dataset_id,
        )
    except ValidationError as exc:
        raise _usage_error(exc) from None


def ingest_options(func):
    """Column and parsing flags shared by every command that reads datasets"""
    options = [
        click.option("--ts-col", default="0", show_default=True, help="Timestamp column name or 0-based position"),
        click.option("--value-col", default="1", show_default=True, help="Value column name or 0-based position"),
        click.option(
            "--date-format",
            default=DEFAULT_DATE_FORMAT,
            show_default=True,
            help="Pattern with YYYY, YY, MM, DD; 'auto' for ISO-8601; 'none' for integer timestamps",
        ),
        click.option(
            "--missing-policy",
            type=click.Choice([p.value for p in MissingPolicy]),
            default=MissingPolicy.DROP_ROW.value,
            show_default=True,
        ),
        click.option("--delimiter", default=",", show_default=True, help="Single character; '\\t' for TSV"),
        click.option("--no-header", is_flag=True, help="The file has no header line"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _write_text(text: str, output: Optional[Path]) -> None:
    if output is None:
        click.echo(text, nl=False)
        return
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        with open(output, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {output}: {exc}") from exc


def _emit(payload: Any, output: Optional[Path]) -> None:
    _write_text(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n", output)


def _plot_base(output: Path, dataset_id: str, many: bool) -> Path:
    if not many:
        return output
    return output / re.sub(r"[^A-Za-z0-9._-]+", "_", dataset_id).strip("_")


def _report_failure(error: str, **context) -> None:
    logger.error("command_failed", error=error, **context)
    click.echo(f"error: {error}", err=True)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="irregularity")
@click.option("--log-level", default=None, help="Overrides IRREGULARITY_LOG_LEVEL")
@click.option("--log-format", type=click.Choice(["json", "console"]), default=None)
def cli(log_level: Optional[str], log_format: Optional[str]) -> None:
    """Quantify, rank and report the irregularity of sequential datasets."""
    try:
        settings = get_settings()
    except ValidationError as exc:
        raise UsageError(f"invalid IRREGULARITY_* environment: {exc.errors()[0]['msg']}") from None
    configure_logging(level=log_level or settings.LOG_LEVEL, fmt=log_format or settings.LOG_FORMAT)


@cli.command("ingest")
@click.option("--input", "input_path", required=True, type=click.Path(path_type=Path))
@ingest_options
@click.option("--dataset-id", default=None, help="Series id (defaults to the input path)")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--output", type=click.Path(path_type=Path), default=None)
def ingest_command(input_path: Path, dataset_id: Optional[str], fmt: str, output: Optional[Path], **columns) -> None:
    """Clean one dataset file; print its ingest report or export it as CSV."""
    config = _config(
        Command.INGEST,
        inputs=(input_path,),
        output=output,
        format=fmt,
        dataset_ids=(dataset_id,) if dataset_id else (),
    )
    series, report = ingest(_ingest_spec(input_path, dataset_id=dataset_id, **columns))

    if config.format is OutputFormat.CSV:
        _write_text(series.to_csv_text(), config.output)
        return
    _emit(
        {
            "series_id": series.id,
            "source": series.source,
            "n": len(series),
            "report": report.model_dump(mode="json"),
            "stats": describe(series).model_dump(mode="json"),
        },
        config.output,
    )


@cli.command("profile")
@click.option("--input", "inputs", multiple=True, required=True, type=click.Path(path_type=Path))
@ingest_options
@click.option("--dataset-id", "dataset_ids", multiple=True, help="One per --input, in order")
@click.option("--fence-k", type=float, default=None, help="Overrides IRREGULARITY_FENCE_K (1.5)")
@click.option("--quantile-rule", type=click.Choice([r.value for r in QuantileRule]), default=None)
@click.option("--delta", type=float, default=None, help="Overrides IRREGULARITY_DELTA (0.05 x range)")
@click.option("--lookahead", default=AUTO_LOOKAHEAD, show_default=True, help="Positive integer or 'auto'")
@click.option("--format", "fmt", type=click.Choice(["json", "plot"]), default="json", show_default=True)
@click.option("--output", type=click.Path(path_type=Path), default=None)
@click.option("--bank", type=click.Path(path_type=Path), default=None, help="Catalog to upsert the profiles into")
@click.option("--svg", is_flag=True, help="Also render SVG charts (plot format)")
def profile_command(
    inputs: Tuple[Path, ...],
    dataset_ids: Tuple[str, ...],
    fence_k: Optional[float],
    quantile_rule: Optional[str],
    delta: Optional[float],
    lookahead: str,
    fmt: str,
    output: Optional[Path],
    bank: Optional[Path],
    svg: bool,
    **columns,
) -> int:
    """Profile datasets by IQR outliers and IPPD peak periods."""
    config = _config(
        Command.PROFILE,
        inputs=inputs,
        output=output,
        fence_k=fence_k,
        quantile_rule=quantile_rule,
        delta=delta,
        lookahead=lookahead,
        format=fmt,
        dataset_ids=dataset_ids,
    )
    ids: Sequence[Optional[str]] = config.dataset_ids or [None] * len(config.inputs)
    specs = [_ingest_spec(path, dataset_id=dataset_id, **columns) for path, dataset_id in zip(config.inputs, ids)]

    catalog = load_catalog(bank) if bank is not None and bank.exists() else BankCatalog()
    build = build_bank(
        specs,
        fence_k=config.fence_k,
        peaks=config.peaks,
        quantile_rule=config.quantile_rule,
        delta=config.delta,
        catalog=catalog,
    )
    for failure in build.failures:
        _report_failure(failure.error, path=failure.path, dataset_id=failure.dataset_id)

    if bank is not None and build.profiled:
        save_catalog(build.catalog, bank)

    if config.format is OutputFormat.PLOT:
        many = len(config.inputs) > 1
        written: List[str] = []
        for series, profile in build.profiled:
            base = _plot_base(config.output, profile.dataset_id, many)
            written += [str(p) for p in emit_plot(profile.ippd, series, base, svg=svg)]
            written += [str(p) for p in emit_boxplot(profile.box, series, base)]
        _write_text("".join(f"{path}\n" for path in written), None)
    else:
        profiles = [profile.model_dump(mode="json") for _, profile in build.profiled]
        if len(config.inputs) == 1:
            if profiles:
                _emit(profiles[0], config.output)
        else:
            _emit(profiles, config.output)

    return build.exit_code


@cli.command("peaks")
@click.option("--input", "input_path", required=True, type=click.Path(path_type=Path))
@ingest_options
@click.option("--delta", type=float, default=None, help="Overrides IRREGULARITY_DELTA (0.05 x range)")
@click.option("--lookahead", default=AUTO_LOOKAHEAD, show_default=True, help="Positive integer or 'auto'")
@click.option("--format", "fmt", type=click.Choice(["json", "plot"]), default="json", show_default=True)
@click.option("--output", type=click.Path(path_type=Path), default=None)
@click.option("--svg", is_flag=True, help="Also render an SVG chart (plot format)")
def peaks_command(
    input_path: Path,
    delta: Optional[float],
    lookahead: str,
    fmt: str,
    output: Optional[Path],
    svg: bool,
    **columns,
) -> None:
    """Detect IPPD peaks, tuning the lookahead unless one is given."""
    config = _config(
        Command.PEAKS, inputs=(input_path,), output=output, delta=delta, lookahead=lookahead, format=fmt
    )
    settings = get_settings()
    series, _ = ingest(_ingest_spec(input_path, **columns))
    delta = config.delta if config.delta is not None else default_delta(series, settings.DELTA_FRACTION)

    if config.peaks is None:
        result = tune_lookahead(series, delta, default_candidates(series, settings.lookahead_candidates))
    else:
        result = ippd_peaks(series, PeakParams(delta=delta, lookahead=config.peaks))

    if config.format is OutputFormat.PLOT:
        written = emit_plot(result, series, config.output, svg=svg)
        _write_text("".join(f"{path}\n" for path in written), None)
    else:
        _emit(result.model_dump(mode="json"), config.output)


@cli.command("rank")
@click.option("--bank", required=True, type=click.Path(path_type=Path))
@click.option(
    "--key",
    type=click.Choice([k.value for k in RankKey]),
    default=RankKey.OUTLIER_COUNT.value,
    show_default=True,
)
@click.option("--output", type=click.Path(path_type=Path), default=None)
def rank_command(bank: Path, key: str, output: Optional[Path]) -> None:
    """Rank the bank, most irregular first; elect primary and validation datasets."""
    config = _config(Command.RANK, output=output)
    catalog = load_catalog(bank)
    primary, validation = select_candidates(catalog, RankKey(key))

    ranking = []
    for position, dataset_id in enumerate(rank_bank(catalog, RankKey(key)), start=1):
        profile = catalog.entries[dataset_id].profile
        ranking.append(
            {
                "rank": position,
                "dataset_id": dataset_id,
                "value": getattr(profile, key),
                "outlier_count": profile.outlier_count,
                "outlier_fraction": profile.outlier_fraction,
                "peak_count": profile.peak_count,
                "period_cv": profile.period_cv,
            }
        )
    _emit(
        {"key": key, "ranking": ranking, "primary": primary, "validation": validation},
        config.output,
    )


@cli.command("evaluate")
@click.option("--actuals", required=True, type=click.Path(path_type=Path))
@click.option("--predictions", multiple=True, required=True, type=click.Path(path_type=Path))
@ingest_options
@click.option("--param-count", type=int, default=None, help="Total number of model parameters")
@click.option("--exec-time", type=float, default=None, help="Execution time in seconds")
@click.option(
    "--rank-by", type=click.Choice([r.value for r in RankBy]), default=RankBy.RMSE.value, show_default=True
)
@click.option("--output", type=click.Path(path_type=Path), default=None)
def evaluate_command(
    actuals: Path,
    predictions: Tuple[Path, ...],
    param_count: Optional[int],
    exec_time: Optional[float],
    rank_by: str,
    output: Optional[Path],
    **columns,
) -> int:
    """Score prediction files against actuals (MAE, MSE, RMSE, R2, efficiency)."""
    config = _config(Command.EVALUATE, inputs=(actuals, *predictions), output=output)
    if param_count is not None and param_count < 1:
        raise UsageError("invalid --param-count: must be positive")
    if exec_time is not None and not exec_time > 0:
        raise UsageError("invalid --exec-time: must be positive")

    actuals_spec = _ingest_spec(actuals, **columns)
    reports: Dict[str, Any] = {}
    undefined: List[str] = []
    for path in predictions:
        pair = load_prediction_pair(actuals_spec, _ingest_spec(path, **columns))
        try:
            report = evaluate(pair, param_count=param_count, exec_time_seconds=exec_time)
        except R2UndefinedError as exc:
            report = exc.report
            undefined.append(f"{path}: {exc}")
        reports[str(path)] = report

    if len(predictions) == 1:
        _emit(reports[str(predictions[0])].model_dump(mode="json"), config.output)
    else:
        ranking = rank_reports(list(reports.items()), RankBy(rank_by))
        _emit(
            {
                "rank_by": rank_by,
                "ranking": ranking,
                "reports": {label: report.model_dump(mode="json") for label, report in reports.items()},
            },
            config.output,
        )

    for message in undefined:
        _report_failure(message)
    return 1 if undefined else 0


@cli.command("report")
@click.option("--bank", required=True, type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--output", type=click.Path(path_type=Path), default=None)
def report_command(bank: Path, fmt: str, output: Optional[Path]) -> None:
    """List every catalog entry once, ordered by dataset id."""
    config = _config(Command.REPORT, output=output, format=fmt)
    catalog = load_catalog(bank)

    rows = []
    for dataset_id in sorted(catalog.entries):
        entry = catalog.entries[dataset_id]
        profile = entry.profile
        params = profile.ippd.peaks.params
        rows.append(
            {
                "dataset_id": dataset_id,
                "source_path": entry.source_path,
                "n": profile.n,
                "outlier_count": profile.outlier_count,
                "outlier_fraction": profile.outlier_fraction,
                "peak_count": profile.peak_count,
                "period_cv": profile.period_cv,
                "delta": params.delta,
                "lookahead": params.lookahead,
                "rows_read": entry.ingest.rows_read if entry.ingest else None,
                "rows_kept": entry.ingest.rows_kept if entry.ingest else None,
                "rows_dropped": entry.ingest.rows_dropped if entry.ingest else None,
                "params_digest": profile.params_digest,
                "profiled_at": profile.profiled_at.isoformat(),
            }
        )

    if config.format is OutputFormat.CSV:
        _write_text(pd.DataFrame(rows, columns=REPORT_COLUMNS).to_csv(index=False, lineterminator="\n"), config.output)
    else:
        _emit({"version": catalog.version, "entries": rows}, config.output)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code: 0 ok, 1 data error, 2 usage error"""
    # stderr until the group callback applies the configured level and format
    configure_logging()
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="irregularity",
            standalone_mode=False,
        )
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except IrregularityError as exc:
        _report_failure(str(exc), error_type=type(exc).__name__)
        return exc.exit_code
    except ValidationError as exc:
        _report_failure(str(exc), error_type="ValidationError")
        return 1
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
