"""Deterministic SVG chart rendering.

The writer emits byte-identical output for identical input: geometry is
formatted with a fixed "%.2f", colors come from a fixed palette, and the
underlying numbers ride along as data-* attributes in full repr precision
so a chart can be checked against the table it was drawn from.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 70
MARGIN_RIGHT = 24
MARGIN_TOP = 48
MARGIN_BOTTOM = 64
PLOT_W = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
PLOT_H = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

# 16 visually distinct colors so up to 15 cluster groups never collide.
PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
    "#aec7e8",
    "#ffbb78",
    "#98df8a",
    "#ff9896",
    "#c5b0d5",
    "#c49c94",
)

_HEAT_LO = (29, 53, 87)
_HEAT_HI = (230, 57, 70)

CHART_KINDS = ("bar", "line", "scatter", "heatmap")


@dataclass(frozen=True)
class LineSeries:
    name: str
    xs: tuple[float, ...]
    ys: tuple[float, ...]


@dataclass(frozen=True)
class ChartSpec:
    kind: str
    title: str
    x_label: str = ""
    y_label: str = ""
    categories: tuple[str, ...] = ()
    values: tuple[float, ...] = ()
    lines: tuple[LineSeries, ...] = ()
    points: tuple[tuple[float, float], ...] = ()
    point_groups: tuple[int, ...] = ()
    matrix: tuple[tuple[float, ...], ...] = ()
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CHART_KINDS:
            raise ValueError(f"unknown chart kind {self.kind!r}; expected one of {CHART_KINDS}")


def _fmt(v: float) -> str:
    return "%.2f" % v


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _span(lo: float, hi: float) -> tuple[float, float]:
    if hi > lo:
        return lo, hi
    return lo - 0.5, lo + 0.5


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + i * (hi - lo) / (n - 1) for i in range(n)]


def _tick_label(v: float) -> str:
    return "%.6g" % v


def _heat_color(t: float) -> str:
    channels = (
        round(a + t * (b - a)) for a, b in zip(_HEAT_LO, _HEAT_HI)
    )
    return "#%02x%02x%02x" % tuple(channels)


def _validate(chart: ChartSpec) -> None:
    if chart.kind == "bar":
        if not chart.categories or not chart.values:
            raise ValueError("bar chart needs categories and values")
        if len(chart.categories) != len(chart.values):
            raise ValueError("categories and values must have equal length")
    elif chart.kind == "line":
        if not chart.lines or all(len(s.xs) == 0 for s in chart.lines):
            raise ValueError("line chart needs at least one nonempty series")
        for s in chart.lines:
            if len(s.xs) != len(s.ys):
                raise ValueError(f"series {s.name!r} has mismatched xs/ys")
    elif chart.kind == "scatter":
        if not chart.points:
            raise ValueError("scatter chart needs points")
        if chart.point_groups and len(chart.point_groups) != len(chart.points):
            raise ValueError("point_groups must match points in length")
    elif chart.kind == "heatmap":
        if not chart.matrix or not chart.matrix[0]:
            raise ValueError("heatmap needs a nonempty matrix")
        width = len(chart.matrix[0])
        if any(len(row) != width for row in chart.matrix):
            raise ValueError("heatmap matrix rows must have equal length")


def _frame(chart: ChartSpec, body: list[str], x_ticks: list[tuple[float, str]],
           y_ticks: list[tuple[float, str]]) -> str:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH // 2}" y="26" font-family="sans-serif" font-size="16" '
        f'text-anchor="middle" font-weight="bold">{_esc(chart.title)}</text>',
    ]
    ax_bottom = MARGIN_TOP + PLOT_H
    ax_right = MARGIN_LEFT + PLOT_W
    out.append(
        f'<line x1="{MARGIN_LEFT}" y1="{ax_bottom}" x2="{ax_right}" y2="{ax_bottom}" '
        f'stroke="#333333" stroke-width="1"/>'
    )
    out.append(
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{ax_bottom}" '
        f'stroke="#333333" stroke-width="1"/>'
    )
    for px, label in x_ticks:
        out.append(
            f'<line x1="{_fmt(px)}" y1="{ax_bottom}" x2="{_fmt(px)}" y2="{ax_bottom + 5}" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{ax_bottom + 20}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{_esc(label)}</text>'
        )
    for py, label in y_ticks:
        out.append(
            f'<line x1="{MARGIN_LEFT - 5}" y1="{_fmt(py)}" x2="{MARGIN_LEFT}" y2="{_fmt(py)}" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{_fmt(py + 4)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{_esc(label)}</text>'
        )
    if chart.x_label:
        out.append(
            f'<text x="{MARGIN_LEFT + PLOT_W // 2}" y="{HEIGHT - 14}" font-family="sans-serif" '
            f'font-size="13" text-anchor="middle">{_esc(chart.x_label)}</text>'
        )
    if chart.y_label:
        cy = MARGIN_TOP + PLOT_H // 2
        out.append(
            f'<text x="18" y="{cy}" font-family="sans-serif" font-size="13" '
            f'text-anchor="middle" transform="rotate(-90 18 {cy})">{_esc(chart.y_label)}</text>'
        )
    out.append('<g id="plot-area">')
    out.extend(body)
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _render_bar(chart: ChartSpec) -> str:
    n = len(chart.values)
    lo = min(0.0, min(chart.values))
    hi = max(0.0, max(chart.values))
    lo, hi = _span(lo, hi)
    span = hi - lo
    slot = PLOT_W / n
    bar_w = slot * 0.8
    zero_y = MARGIN_TOP + PLOT_H * (1.0 - (0.0 - lo) / span)
    body = []
    x_ticks = []
    for i, (cat, val) in enumerate(zip(chart.categories, chart.values)):
        val_y = MARGIN_TOP + PLOT_H * (1.0 - (val - lo) / span)
        top = min(val_y, zero_y)
        height = abs(zero_y - val_y)
        x = MARGIN_LEFT + i * slot + (slot - bar_w) / 2.0
        color = PALETTE[i % len(PALETTE)]
        body.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(top)}" width="{_fmt(bar_w)}" '
            f'height="{_fmt(height)}" fill="{color}" '
            f'data-category="{_esc(cat)}" data-value="{_esc(repr(float(val)))}"/>'
        )
        x_ticks.append((MARGIN_LEFT + i * slot + slot / 2.0, str(cat)))
    y_ticks = [
        (MARGIN_TOP + PLOT_H * (1.0 - (t - lo) / span), _tick_label(t)) for t in _ticks(lo, hi)
    ]
    if n > 14:
        x_ticks = x_ticks[:: max(1, n // 12)]
    return _frame(chart, body, x_ticks, y_ticks)


def _data_bounds(xs: list[float], ys: list[float]) -> tuple[float, float, float, float]:
    x_lo, x_hi = _span(min(xs), max(xs))
    y_lo, y_hi = _span(min(ys), max(ys))
    return x_lo, x_hi, y_lo, y_hi


def _render_line(chart: ChartSpec) -> str:
    xs = [x for s in chart.lines for x in s.xs]
    ys = [y for s in chart.lines for y in s.ys]
    x_lo, x_hi, y_lo, y_hi = _data_bounds(xs, ys)
    body = []
    for idx, s in enumerate(chart.lines):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(
            f"{_fmt(MARGIN_LEFT + PLOT_W * (x - x_lo) / (x_hi - x_lo))},"
            f"{_fmt(MARGIN_TOP + PLOT_H * (1.0 - (y - y_lo) / (y_hi - y_lo)))}"
            for x, y in zip(s.xs, s.ys)
        )
        data_xs = ",".join(repr(float(x)) for x in s.xs)
        data_ys = ",".join(repr(float(y)) for y in s.ys)
        body.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5" '
            f'data-name="{_esc(s.name)}" data-xs="{data_xs}" data-ys="{data_ys}"/>'
        )
    for idx, s in enumerate(chart.lines):
        color = PALETTE[idx % len(PALETTE)]
        ly = MARGIN_TOP + 16 + 16 * idx
        body.append(
            f'<text x="{MARGIN_LEFT + PLOT_W - 8}" y="{ly}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end" fill="{color}">{_esc(s.name)}</text>'
        )
    x_ticks = [
        (MARGIN_LEFT + PLOT_W * (t - x_lo) / (x_hi - x_lo), _tick_label(t))
        for t in _ticks(x_lo, x_hi)
    ]
    y_ticks = [
        (MARGIN_TOP + PLOT_H * (1.0 - (t - y_lo) / (y_hi - y_lo)), _tick_label(t))
        for t in _ticks(y_lo, y_hi)
    ]
    return _frame(chart, body, x_ticks, y_ticks)


def _render_scatter(chart: ChartSpec) -> str:
    xs = [p[0] for p in chart.points]
    ys = [p[1] for p in chart.points]
    x_lo, x_hi, y_lo, y_hi = _data_bounds(xs, ys)
    groups = chart.point_groups or tuple(0 for _ in chart.points)
    body = []
    for (x, y), g in zip(chart.points, groups):
        px = MARGIN_LEFT + PLOT_W * (x - x_lo) / (x_hi - x_lo)
        py = MARGIN_TOP + PLOT_H * (1.0 - (y - y_lo) / (y_hi - y_lo))
        color = PALETTE[g % len(PALETTE)]
        body.append(
            f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="{color}" fill-opacity="0.75" '
            f'data-x="{repr(float(x))}" data-y="{repr(float(y))}" data-group="{g}"/>'
        )
    x_ticks = [
        (MARGIN_LEFT + PLOT_W * (t - x_lo) / (x_hi - x_lo), _tick_label(t))
        for t in _ticks(x_lo, x_hi)
    ]
    y_ticks = [
        (MARGIN_TOP + PLOT_H * (1.0 - (t - y_lo) / (y_hi - y_lo)), _tick_label(t))
        for t in _ticks(y_lo, y_hi)
    ]
    return _frame(chart, body, x_ticks, y_ticks)


def _render_heatmap(chart: ChartSpec) -> str:
    n_rows = len(chart.matrix)
    n_cols = len(chart.matrix[0])
    flat = [v for row in chart.matrix for v in row]
    finite = [v for v in flat if v == v]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 1.0
    span = hi - lo if hi > lo else 1.0
    cell_w = PLOT_W / n_cols
    cell_h = PLOT_H / n_rows
    body = []
    for i, row in enumerate(chart.matrix):
        for j, v in enumerate(row):
            x = MARGIN_LEFT + j * cell_w
            y = MARGIN_TOP + i * cell_h
            if v == v:
                color = _heat_color((v - lo) / span)
            else:
                color = "#cccccc"
            body.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cell_w)}" '
                f'height="{_fmt(cell_h)}" fill="{color}" data-row="{i}" data-col="{j}" '
                f'data-value="{_esc(repr(float(v)))}"/>'
            )
    x_ticks = [
        (MARGIN_LEFT + (j + 0.5) * cell_w, chart.col_labels[j] if j < len(chart.col_labels) else str(j))
        for j in range(n_cols)
    ]
    y_ticks = [
        (MARGIN_TOP + (i + 0.5) * cell_h, chart.row_labels[i] if i < len(chart.row_labels) else str(i))
        for i in range(n_rows)
    ]
    return _frame(chart, body, x_ticks, y_ticks)


_RENDERERS = {
    "bar": _render_bar,
    "line": _render_line,
    "scatter": _render_scatter,
    "heatmap": _render_heatmap,
}


def render_svg(chart: ChartSpec, path: str | Path | None = None) -> str:
    """Render to an SVG string; when path is given also write it as UTF-8.

    Same ChartSpec in, same bytes out.  Raises ValueError on empty or
    inconsistent data.
    """
    _validate(chart)
    svg = _RENDERERS[chart.kind](chart)
    if path is not None:
        Path(path).write_bytes(svg.encode("utf-8"))
    return svg
