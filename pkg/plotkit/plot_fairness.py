#!/usr/bin/env python3
"""Render the Jain fairness index of concurrent mode versus flow count.

One series per path-loss exponent, seed-averaged.  Usage:

    plot_fairness.py SUMMARY.csv --out fig6.png
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


def render(summary_path: str, out_path: str) -> None:
    rows = load_summary(summary_path)
    if not any(r.mode == "cts" for r in rows):
        raise SchemaError(f"{summary_path}: no 'cts' rows to plot")

    fig, ax = plt.subplots()
    for index, pathloss in enumerate(pathloss_values(rows, "cts")):
        flows, means, _, _ = series_over_flows(
            rows, "cts", pathloss, lambda r: r.jain_index
        )
        ax.plot(flows, means, label=f"n={pathloss:g}", **style_for(index))
    ax.set_xlabel("Number of flows")
    ax.set_ylabel("Jain fairness index")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Fairness vs flows per path-loss exponent")
    ax.legend(fontsize=8)
    fig.tight_layout()
    save_deterministic(fig, out_path)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("summary", help="summary CSV produced by ctsim run/sweep")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    args = parser.parse_args(argv)
    try:
        render(args.summary, args.out)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
