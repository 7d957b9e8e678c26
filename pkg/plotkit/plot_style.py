"""Shared deterministic matplotlib setup for the report figures."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update(
    {
        "figure.figsize": (7.0, 4.6),
        "figure.dpi": 120,
        "savefig.dpi": 120,
        "font.size": 10,
        "axes.grid": True,
        "grid.alpha": 0.35,
        "lines.linewidth": 1.6,
        "lines.markersize": 5,
        # Stable ids inside SVG output so identical inputs give identical bytes.
        "svg.hashsalt": "ctsim-plotkit",
    }
)

MARKERS = ("o", "s", "^", "D", "v", "P", "X", "*")
COLORS = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)


def style_for(index: int) -> dict:
    return {
        "marker": MARKERS[index % len(MARKERS)],
        "color": COLORS[index % len(COLORS)],
    }


def save_deterministic(fig, out_path: str) -> None:
    """Write the figure without any timestamp metadata."""
    if out_path.lower().endswith(".svg"):
        fig.savefig(out_path, metadata={"Date": None})
    elif out_path.lower().endswith(".png"):
        fig.savefig(out_path, metadata={"Software": None})
    else:
        fig.savefig(out_path)
