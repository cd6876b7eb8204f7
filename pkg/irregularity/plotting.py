# Irregularity Profiler - Plot Emission
# Plot data files plus gnuplot script stubs for the IPPD line chart and the
# box-and-whisker summary; SVG rendering through matplotlib is optional

from pathlib import Path
from typing import Dict, List, Union

import pandas as pd
import structlog

from irregularity.core.exceptions import OutputError
from irregularity.outliers import BoxStats
from irregularity.peaks import IppdResult
from irregularity.series import TimeSeries

logger = structlog.get_logger(__name__)

MARKER_NONE = "none"
MARKER_MAX = "max"
MARKER_MIN = "min"

_PEAKS_SCRIPT = """\
# IPPD chart for %(title)s
# usage: gnuplot %(script)s
set datafile separator "\\t"
set datafile commentschars "#"
set terminal svg size 1200,600
set output '%(output)s'
set title '%(title)s'
set xlabel 'index'
set ylabel 'value'
set key top left
plot '%(data)s' using 1:2 with lines lc rgb '#808080' title 'series', \\
     '' using 1:(strcol(3) eq 'max' ? $2 : 1/0) with points pt 9 lc rgb '#c0392b' title 'maxima', \\
     '' using 1:(strcol(3) eq 'min' ? $2 : 1/0) with points pt 11 lc rgb '#2471a3' title 'minima'
"""

_BOX_SCRIPT = """\
# Box-and-whisker chart for %(title)s
# usage: gnuplot %(script)s
set datafile separator "\\t"
set terminal svg size 600,600
set output '%(output)s'
set title '%(title)s'
set xrange [0:2]
set xtics ('%(title)s' 1)
set boxwidth 0.4
# x whisker_low q1 q2 q3 whisker_high
plot '%(data)s' index 0 using 1:3:2:6:5 with candlesticks whiskerbars title 'IQR', \\
     '' index 0 using 1:4:4:4:4 with candlesticks lt -1 notitle, \\
     '' index 1 using (1):2 with points pt 7 title 'outliers'
"""


def _base(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in (".dat", ".gp", ".svg") else path


def _sibling(base: Path, suffix: str) -> Path:
    # dataset ids such as "gbp.usd" keep their dots
    return base.with_name(base.name + suffix)


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write plot file {path}: {exc}") from exc


def peak_markers(ippd: IppdResult, length: int) -> List[str]:
    """One marker per sample: max, min or none"""
    markers = [MARKER_NONE] * length
    for index, _ in ippd.peaks.maxima:
        markers[index] = MARKER_MAX
    for index, _ in ippd.peaks.minima:
        markers[index] = MARKER_MIN
    return markers


def emit_plot(
    ippd: IppdResult, series: TimeSeries, path: Union[str, Path], svg: bool = False
) -> List[Path]:
    """Write ``<base>.dat`` (index, value, marker) and ``<base>.gp``;
    ``<base>.svg`` as well when ``svg`` is set. Returns the written paths."""
    base = _base(path)
    data_path = _sibling(base, ".dat")
    script_path = _sibling(base, ".gp")

    frame = pd.DataFrame(
        {
            "index": range(len(series)),
            "value": [repr(v) for v in series.values],
            "marker": peak_markers(ippd, len(series)),
        }
    )
    body = frame.to_csv(sep="\t", index=False, header=False, lineterminator="\n")
    _write(data_path, "# index\tvalue\tmarker\n" + body)
    _write(
        script_path,
        _PEAKS_SCRIPT
        % {
            "title": series.id.replace("'", ""),
            "script": script_path.name,
            "output": _sibling(base, ".svg").name,
            "data": data_path.name,
        },
    )
    written = [data_path, script_path]

    if svg:
        written.append(_render_peaks_svg(ippd, series, _sibling(base, ".svg")))

    logger.info(
        "plot_emitted",
        series_id=series.id,
        files=[str(p) for p in written],
        markers=ippd.peak_count,
    )
    return written


def emit_boxplot(box: BoxStats, series: TimeSeries, path: Union[str, Path]) -> List[Path]:
    """Write ``<base>.box.dat`` (summary block, blank lines, outlier block)
    and ``<base>.box.gp``"""
    base = _base(path)
    data_path = _sibling(base, ".box.dat")
    script_path = _sibling(base, ".box.gp")

    low = box.whisker_low if box.whisker_low is not None else box.q1
    high = box.whisker_high if box.whisker_high is not None else box.q3
    summary = "\t".join(repr(float(v)) for v in (1, low, box.q1, box.q2, box.q3, high))
    outliers = "".join(f"{index}\t{series.values[index]!r}\n" for index in box.outlier_indices)
    _write(
        data_path,
        "# x\twhisker_low\tq1\tq2\tq3\twhisker_high\n"
        + summary
        + "\n\n\n# index\tvalue\n"
        + (outliers or "# no outliers\n"),
    )
    _write(
        script_path,
        _BOX_SCRIPT
        % {
            "title": series.id.replace("'", ""),
            "script": script_path.name,
            "output": _sibling(base, ".box.svg").name,
            "data": data_path.name,
        },
    )
    return [data_path, script_path]


def _render_peaks_svg(ippd: IppdResult, series: TimeSeries, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed hash salt and no date keep the SVG byte-stable
    matplotlib.rcParams["svg.hashsalt"] = "irregularity"

    markers: Dict[str, List] = {MARKER_MAX: ippd.peaks.maxima, MARKER_MIN: ippd.peaks.minima}
    fig, ax = plt.subplots(figsize=(12, 6))
    try:
        ax.plot(range(len(series)), series.values, color="#808080", linewidth=0.8, label="series")
        for name, color, shape in ((MARKER_MAX, "#c0392b", "v"), (MARKER_MIN, "#2471a3", "^")):
            points = markers[name]
            if points:
                ax.scatter([i for i, _ in points], [v for _, v in points], c=color, marker=shape, s=18, label=name)
        ax.set_title(series.id)
        ax.set_xlabel("index")
        ax.set_ylabel("value")
        ax.legend(loc="upper left")
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OutputError(f"cannot write plot file {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path
