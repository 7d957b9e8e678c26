#!/usr/bin/env python3
"""Render network or per-flow throughput versus flow count from a summary CSV.

One line per (mode, path-loss exponent) series: the seed mean with min/max
whiskers.  Usage:

    plot_throughput.py SUMMARY.csv --metric network --out fig4.png
    plot_throughput.py SUMMARY.csv --metric flow --out fig5.svg
"""

from __future__ import annotations

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from plot_style import save_deterministic, style_for  # noqa: E402
from summary_schema import (  # noqa: E402
    SchemaError,
    load_summary,
    pathloss_values,
    series_over_flows,
)

import matplotlib.pyplot as plt  # noqa: E402

METRICS = {
    "network": ("network_throughput_bps", "Network throughput (bit/s)"),
    "flow": ("mean_flow_throughput_bps", "Mean flow throughput (bit/s)"),
}


def render(summary_path: str, metric: str, out_path: str) -> None:
    field, ylabel = METRICS[metric]
    rows = load_summary(summary_path)
    modes = {r.mode for r in rows}
    for needed in ("cts", "dts"):
        if needed not in modes:
            raise SchemaError(f"{summary_path}: no '{needed}' rows to plot")

    fig, ax = plt.subplots()
    index = 0
    for mode in ("cts", "dts"):
        for pathloss in pathloss_values(rows, mode):
            flows, means, lows, highs = series_over_flows(
                rows, mode, pathloss, lambda r: getattr(r, field)
            )
            yerr = [
                [m - lo for m, lo in zip(means, lows)],
                [hi - m for m, hi in zip(means, highs)],
            ]
            ax.errorbar(
                flows, means, yerr=yerr, capsize=3,
                label=f"{mode.upper()}, n={pathloss:g}",
                linestyle="-" if mode == "cts" else "--",
                **style_for(index),
            )
            index += 1
    ax.set_xlabel("Number of flows")
    ax.set_ylabel(ylabel)
    ax.set_ylim(bottom=0)
    ax.set_title(
        "Network throughput vs flows" if metric == "network"
        else "Flow throughput vs flows"
    )
    ax.legend(fontsize=8)
    fig.tight_layout()
    save_deterministic(fig, out_path)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("summary", help="summary CSV produced by ctsim run/sweep")
    parser.add_argument("--metric", choices=sorted(METRICS), default="network")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    args = parser.parse_args(argv)
    try:
        render(args.summary, args.metric, args.out)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
