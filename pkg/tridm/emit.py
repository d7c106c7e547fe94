import math
from pathlib import Path
from typing import Union
from xml.sax.saxutils import escape, quoteattr

import pandas as pd

from . import __version__
from .dynamics import DensityMatrix
from .logging_utils import get_logger
from .models import KappaSweepConfig, PartitionId, SweepTable, ValidationReport

# CSV and SVG writers. Output is deterministic: 12 significant digits, LF line
# endings, UTF-8, and no timestamps.

FLOAT_FORMAT = "%.12g"

PathLike = Union[str, Path]

# (MeasureSet attribute, legend label, stroke colour)
SVG_SERIES = (
    ("concurrence", "C", "#1f77b4"),
    ("negativity", "N", "#d62728"),
    ("eof", "E_F", "#2ca02c"),
    ("info_nonlocal", "I_non", "#9467bd"),
)

SVG_WIDTH = 640
SVG_HEIGHT = 400
_MARGIN = {"left": 60, "right": 110, "top": 30, "bottom": 50}
_TICKS = 5


def csv_header(table: SweepTable) -> str:
    """Fixed provenance prefix, then the optional fields of kappa sweeps and presets."""
    config = table.config
    line = (
        f"# tri-dm v{__version__}; propagator={config.propagator.value}; info_mode={config.info_mode.value}"
        f"; params: {table.params.describe()}"
    )
    if isinstance(config, KappaSweepConfig):
        line += f"; t={config.t:.12g}"
    if config.label:
        line += f"; preset={config.label}"
    if config.inferred:
        line += f"; inferred={','.join(config.inferred)}"
    if config.inherited:
        line += f"; inherited={','.join(config.inherited)}"
    return line


def _frame_text(frame: pd.DataFrame, header: str) -> str:
    return header + "\n" + frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="")


def _write_frame(frame: pd.DataFrame, path: PathLike, header: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(_frame_text(frame, header))


def format_csv(table: SweepTable) -> str:
    """The exact text ``emit_csv`` writes."""
    return _frame_text(table.to_frame(), csv_header(table))


def emit_csv(table: SweepTable, path: PathLike) -> None:
    _write_frame(table.to_frame(), path, csv_header(table))
    get_logger().info("Wrote %d rows to %s", len(table), path)


def read_csv(path: PathLike) -> pd.DataFrame:
    """Read back a table written by ``emit_csv``."""
    return pd.read_csv(path, skiprows=1)


def emit_validation_csv(report: ValidationReport, path: PathLike) -> None:
    header = f"# tri-dm v{__version__}; closed-form validation; records={len(report)}"
    _write_frame(report.to_frame(), path, header)
    get_logger().info("Wrote %d validation records to %s", len(report), path)


def emit_state_csv(rho: DensityMatrix, path: PathLike, header: str) -> None:
    """Write a density matrix in long format, one ``i,j,re,im`` row per element."""
    data = rho.matrix.data
    dim = rho.matrix.dim
    frame = pd.DataFrame(
        {
            "i": [i for i in range(dim) for _ in range(dim)],
            "j": [j for _ in range(dim) for j in range(dim)],
            "re": data.real.reshape(-1),
            "im": data.imag.reshape(-1),
        }
    )
    _write_frame(frame, path, header)


def svg_path(csv_path: PathLike, partition: PartitionId) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(f"{csv_path.stem}_{partition.value}.svg")


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _y_range(table: SweepTable, partition: PartitionId) -> tuple[float, float]:
    top = 1.0
    for field, _, _ in SVG_SERIES:
        column = table.column(partition, field)
        finite = column[~pd.isna(column)]
        if finite.size:
            top = max(top, float(finite.max()))
    return 0.0, float(math.ceil(top))


def render_svg(table: SweepTable, partition: PartitionId) -> str:
    """One line chart of the partition's quantifiers against the sweep axis."""
    if not len(table):
        raise ValueError("cannot plot an empty table")
    xs = table.xs()
    x_min, x_max = float(xs[0]), float(xs[-1])
    if x_max == x_min:
        x_max = x_min + 1.0
    y_min, y_max = _y_range(table, partition)
    plot_w = SVG_WIDTH - _MARGIN["left"] - _MARGIN["right"]
    plot_h = SVG_HEIGHT - _MARGIN["top"] - _MARGIN["bottom"]
    left, top = _MARGIN["left"], _MARGIN["top"]
    baseline = top + plot_h

    def sx(x: float) -> float:
        return left + (x - x_min) / (x_max - x_min) * plot_w

    def sy(y: float) -> float:
        return baseline - (y - y_min) / (y_max - y_min) * plot_h

    title = f"{partition.value}: {table.config.label or 'sweep'} ({table.params.describe()})"
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f"<title>{escape(title)}</title>",
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{baseline}" x2="{left + plot_w}" y2="{baseline}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{baseline}" stroke="black"/>',
    ]
    for k in range(_TICKS + 1):
        x = x_min + k * (x_max - x_min) / _TICKS
        y = y_min + k * (y_max - y_min) / _TICKS
        px, py = _fmt(sx(x)), _fmt(sy(y))
        parts.append(f'<line x1="{px}" y1="{baseline}" x2="{px}" y2="{baseline + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{px}" y="{baseline + 18}" font-size="11" text-anchor="middle">{escape(_fmt(x))}</text>'
        )
        parts.append(f'<line x1="{left - 5}" y1="{py}" x2="{left}" y2="{py}" stroke="black"/>')
        parts.append(
            f'<text x="{left - 8}" y="{py}" font-size="11" text-anchor="end" dominant-baseline="middle">'
            f"{escape(_fmt(y))}</text>"
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.6g}" y="{SVG_HEIGHT - 10}" font-size="12" text-anchor="middle">'
        f"{escape(table.axis)}</text>"
    )
    legend_y = top
    for field, label, colour in SVG_SERIES:
        column = table.column(partition, field)
        if pd.isna(column).all():
            continue
        points = " ".join(
            f"{_fmt(sx(float(x)))},{_fmt(sy(0.0 if pd.isna(y) else float(y)))}" for x, y in zip(xs, column)
        )
        parts.append(
            f'<polyline fill="none" stroke={quoteattr(colour)} stroke-width="1.5" '
            f"data-series={quoteattr(label)} points={quoteattr(points)}/>"
        )
        legend_x = left + plot_w + 15
        parts.append(
            f'<line x1="{legend_x}" y1="{legend_y}" x2="{legend_x + 20}" y2="{legend_y}" '
            f"stroke={quoteattr(colour)} stroke-width=\"2\"/>"
        )
        parts.append(
            f'<text x="{legend_x + 25}" y="{legend_y}" font-size="12" dominant-baseline="middle">{escape(label)}</text>'
        )
        legend_y += 18
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_svg(table: SweepTable, path: PathLike) -> list[Path]:
    """Write one SVG per partition next to ``path``; returns the written paths."""
    written = []
    for partition in table.partitions:
        target = svg_path(path, partition)
        with open(target, "w", encoding="utf-8", newline="") as handle:
            handle.write(render_svg(table, partition))
        written.append(target)
    get_logger().info("Wrote %d SVG files next to %s", len(written), path)
    return written
