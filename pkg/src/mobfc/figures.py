"""Matplotlib rendering of chart specs to PNG files.

The SVG path in chart.py is the byte-stable archival output; these PNGs are
the human-friendly companions rendered from the same ChartSpec, so the two
always agree on what they show.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .chart import PALETTE, ChartSpec, _validate


def render_png(chart: ChartSpec, path: str | Path, dpi: int = 100) -> None:
    """Draw the chart with matplotlib and save it as a PNG."""
    _validate(chart)
    fig, ax = plt.subplots(figsize=(8.0, 5.0), dpi=dpi)
    try:
        if chart.kind == "bar":
            colors = [PALETTE[i % len(PALETTE)] for i in range(len(chart.values))]
            ax.bar(range(len(chart.values)), chart.values, color=colors, width=0.8)
            ax.set_xticks(range(len(chart.categories)))
            step = max(1, len(chart.categories) // 12)
            labels = [
                c if i % step == 0 else "" for i, c in enumerate(chart.categories)
            ]
            ax.set_xticklabels(labels, rotation=45 if len(chart.categories) > 8 else 0, ha="right" if len(chart.categories) > 8 else "center")
        elif chart.kind == "line":
            for idx, s in enumerate(chart.lines):
                ax.plot(s.xs, s.ys, color=PALETTE[idx % len(PALETTE)], label=s.name, linewidth=1.5)
            if len(chart.lines) > 1 or chart.lines[0].name:
                ax.legend(loc="best", fontsize=9)
        elif chart.kind == "scatter":
            xs = [p[0] for p in chart.points]
            ys = [p[1] for p in chart.points]
            groups = chart.point_groups or tuple(0 for _ in chart.points)
            colors = [PALETTE[g % len(PALETTE)] for g in groups]
            ax.scatter(xs, ys, c=colors, s=12, alpha=0.75, linewidths=0)
        elif chart.kind == "heatmap":
            data = np.array(chart.matrix, dtype=float)
            im = ax.imshow(data, cmap="coolwarm", aspect="auto")
            fig.colorbar(im, ax=ax, shrink=0.8)
            ax.set_xticks(range(data.shape[1]))
            ax.set_yticks(range(data.shape[0]))
            if chart.col_labels:
                ax.set_xticklabels(chart.col_labels, rotation=45, ha="right")
            if chart.row_labels:
                ax.set_yticklabels(chart.row_labels)
        ax.set_title(chart.title)
        if chart.x_label:
            ax.set_xlabel(chart.x_label)
        if chart.y_label:
            ax.set_ylabel(chart.y_label)
        fig.tight_layout()
        fig.savefig(path)
    finally:
        plt.close(fig)
