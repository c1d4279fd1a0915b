import csv
import logging
import string
import typing
from pathlib import Path

from volume_al.errors import ConfigError, IoError, MalformedInput
from volume_al.runner import CSV_COLUMNS, CurveRow, ErrorCurve

__all__ = ["emit_csv", "emit_svg", "load_curve_csv", "make_svg"]

logger = logging.getLogger(__name__)

PathLike = typing.Union[str, Path]

svg_template = string.Template(
    """<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" \
viewBox="0 0 ${width} ${height}">
  <rect width="100%" height="100%" fill="white"/>
  <line x1="${left}" y1="${bottom}" x2="${right}" y2="${bottom}" stroke="black"/>
  <line x1="${left}" y1="${top}" x2="${left}" y2="${bottom}" stroke="black"/>
${ticks}
  <text x="${x_label_x}" y="${x_label_y}" text-anchor="middle" \
font-family="sans-serif" font-size="14">Number of queries</text>
  <text x="${y_label_x}" y="${y_label_y}" text-anchor="middle" \
font-family="sans-serif" font-size="14" \
transform="rotate(-90 ${y_label_x} ${y_label_y})">Error rate</text>
${curves}
${legend}
</svg>
"""
)

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 610, 30, 360


def _format_float(value: float) -> str:
    return repr(float(value))


def _write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    return path


def emit_csv(curve: ErrorCurve, path: PathLike) -> Path:
    """Write one line per row; floats use the shortest exact representation."""
    if not len(curve):
        raise ConfigError("cannot emit an empty error curve")
    lines = [",".join(CSV_COLUMNS)]
    for row in curve:
        lines.append(
            ",".join(
                [
                    row.strategy,
                    str(row.seed),
                    str(row.budget),
                    _format_float(row.error_rate),
                    str(row.queries_used),
                    _format_float(row.wall_ms),
                ]
            )
        )
    path = _write_text(path, "\n".join(lines) + "\n")
    logger.info("Wrote %d rows to %s", len(curve), path)
    return path


def load_curve_csv(path: PathLike) -> ErrorCurve:
    try:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise MalformedInput(f"expected header {','.join(CSV_COLUMNS)}", row=1)
            rows = []
            for number, cells in enumerate(reader, start=2):
                if len(cells) != len(CSV_COLUMNS):
                    raise MalformedInput(
                        f"expected {len(CSV_COLUMNS)} cells, got {len(cells)}",
                        row=number,
                    )
                try:
                    rows.append(
                        CurveRow(
                            strategy=cells[0],
                            seed=int(cells[1]),
                            budget=int(cells[2]),
                            error_rate=float(cells[3]),
                            queries_used=int(cells[4]),
                            wall_ms=float(cells[5]),
                        )
                    )
                except ValueError as e:
                    raise MalformedInput(str(e), row=number) from e
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    return ErrorCurve(rows)


def _scale(value: float, low: float, high: float, start: float, end: float) -> float:
    if high == low:
        return (start + end) / 2
    return start + (value - low) / (high - low) * (end - start)


def make_svg(curve: ErrorCurve) -> str:
    """Render the mean error of every strategy against the budget."""
    means = curve.mean_curves()
    budgets = sorted({budget for points in means.values() for budget, _ in points})
    low, high = budgets[0], budgets[-1]
    top_error = max(1e-9, max(e for points in means.values() for _, e in points))

    def x(budget):
        return _scale(budget, low, high, LEFT, RIGHT)

    def y(error):
        return _scale(error, 0.0, top_error, BOTTOM, TOP)

    ticks = []
    for budget in budgets:
        ticks.append(
            f'  <text x="{x(budget):.2f}" y="{BOTTOM + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{budget}</text>'
        )
    for fraction in (0.0, 0.5, 1.0):
        ticks.append(
            f'  <text x="{LEFT - 8}" y="{y(fraction * top_error):.2f}" '
            f'text-anchor="end" font-family="sans-serif" font-size="11">'
            f"{fraction * top_error:.3g}</text>"
        )

    curves, legend = [], []
    for i, (strategy, points) in enumerate(means.items()):
        colour = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{x(b):.2f},{y(e):.2f}" for b, e in points)
        curves.append(
            f'  <polyline data-strategy="{strategy}" fill="none" '
            f'stroke="{colour}" stroke-width="2" points="{coords}"/>'
        )
        legend.append(
            f'  <text x="{RIGHT - 90}" y="{TOP + 16 * (i + 1)}" fill="{colour}" '
            f'font-family="sans-serif" font-size="12">{strategy}</text>'
        )

    return svg_template.substitute(
        width=WIDTH,
        height=HEIGHT,
        left=LEFT,
        right=RIGHT,
        top=TOP,
        bottom=BOTTOM,
        ticks="\n".join(ticks),
        x_label_x=(LEFT + RIGHT) // 2,
        x_label_y=HEIGHT - 20,
        y_label_x=20,
        y_label_y=(TOP + BOTTOM) // 2,
        curves="\n".join(curves),
        legend="\n".join(legend),
    )


def emit_svg(curve: ErrorCurve, path: PathLike) -> Path:
    if not len(curve):
        raise ConfigError("cannot emit an empty error curve")
    return _write_text(path, make_svg(curve))
