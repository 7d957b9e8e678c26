"""Schema and aggregation for ctsim summary CSVs.

The plotting scripts render only what the simulator emitted; nothing is
recomputed here beyond grouping rows and taking means and ranges.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass

REQUIRED_COLUMNS = (
    "mode",
    "flows",
    "pathloss",
    "seed",
    "network_throughput_bps",
    "mean_flow_throughput_bps",
    "jain_index",
)


class SchemaError(ValueError):
    """The summary CSV does not match the expected schema."""


@dataclass(frozen=True)
class SummaryRow:
    mode: str
    flows: int
    pathloss: float
    seed: int
    network_throughput_bps: float
    mean_flow_throughput_bps: float
    jain_index: float


def load_summary(path: str) -> list[SummaryRow]:
    """Read and validate a summary CSV.

    Raises SchemaError if a required column is absent.  Rows with missing
    or unparseable values in required columns are rejected with a warning
    on stderr; at least one valid row must remain.
    """
    with open(path, newline="") as fp:
        reader = csv.DictReader(fp)
        fields = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in fields]
        if missing:
            raise SchemaError(
                f"{path}: missing required column(s): {', '.join(missing)}"
            )
        rows: list[SummaryRow] = []
        for lineno, raw in enumerate(reader, start=2):
            try:
                row = SummaryRow(
                    mode=raw["mode"].strip(),
                    flows=int(raw["flows"]),
                    pathloss=float(raw["pathloss"]),
                    seed=int(raw["seed"]),
                    network_throughput_bps=float(raw["network_throughput_bps"]),
                    mean_flow_throughput_bps=float(raw["mean_flow_throughput_bps"]),
                    jain_index=float(raw["jain_index"]),
                )
            except (TypeError, ValueError, AttributeError):
                print(f"{path}:{lineno}: rejected row with missing values",
                      file=sys.stderr)
                continue
            if any(
                math.isnan(v)
                for v in (row.network_throughput_bps,
                          row.mean_flow_throughput_bps, row.jain_index)
            ):
                print(f"{path}:{lineno}: rejected row with missing values",
                      file=sys.stderr)
                continue
            if row.mode not in ("cts", "dts"):
                raise SchemaError(f"{path}:{lineno}: unknown mode {row.mode!r}")
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no usable data rows")
    return rows


def series_over_flows(
    rows: list[SummaryRow], mode: str, pathloss: float, value
) -> tuple[list[int], list[float], list[float], list[float]]:
    """Aggregate one (mode, pathloss) series: seed mean with min/max range.

    `value` picks the metric from a row.  Returns (flows, mean, min, max),
    sorted by flow count.
    """
    cells: dict[int, list[float]] = {}
    for row in rows:
        if row.mode == mode and row.pathloss == pathloss:
            cells.setdefault(row.flows, []).append(value(row))
    flows = sorted(cells)
    means = [sum(cells[f]) / len(cells[f]) for f in flows]
    lows = [min(cells[f]) for f in flows]
    highs = [max(cells[f]) for f in flows]
    return flows, means, lows, highs


def pathloss_values(rows: list[SummaryRow], mode: str | None = None) -> list[float]:
    return sorted({r.pathloss for r in rows if mode is None or r.mode == mode})
