"""Configuration, experiment sweeps, and CSV emission.

Configuration is layered: built-in defaults, then a flat key=value config
file, then CTSIM_* environment variables, then command-line flags (each
flag mirrors a config key 1:1).  Unknown keys and out-of-range values are
hard errors naming the offending key.  Summary CSV rows echo the full
effective configuration so any row can be re-run bit-identically.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import IO, Iterable, Mapping, Sequence

from .geometry import save_layout_csv, place_nodes
from .simkernel import RunSummary, SuperframeStats, run_simulation

import numpy as np

log = logging.getLogger(__name__)

ENV_PREFIX = "CTSIM_"

MODES = ("cts", "dts")

# interference_psd_w_per_hz accepts a float or "auto" (= background noise PSD).
_AUTO = "auto"


class ConfigError(ValueError):
    """A configuration problem, naming the offending key."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one simulation cell."""

    mode: str = "cts"
    nodes: int = 30
    room_width: float = 16.0
    room_height: float = 16.0
    coverage_radius: float = 23.0
    flows: int = 6
    pathloss: float = 2.0
    bandwidth_hz: float = 7e9
    tx_power_w: float = 1e-4
    tx_gain_dbi: float = 12.0
    rx_gain_dbi: float = 12.0
    noise_psd_dbm_per_mhz: float = -134.0
    interference_psd_w_per_hz: float | None = None
    carrier_hz: float = 60e9
    slot_duration_s: float = 1e-5
    payload_bits: float = 1e7
    superframe_duration_s: float = 0.065536
    overhead_fraction: float = 0.1
    superframes: int = 200
    seed: int = 0
    interference_model: str = "dual"
    traffic_model: str = "saturated"
    tp_service: str = "cyclic"
    burst_payloads: int = 8
    starvation_superframes: int = 50
    layout_file: str = ""
    out_summary: str = ""
    out_trace: str = ""
    dump_graph: str = ""
    dump_schedule: str = ""
    quiet: bool = False

    @property
    def budget_slots(self) -> int:
        """Transmission-period capacity in whole time slots."""
        usable = (1.0 - self.overhead_fraction) * self.superframe_duration_s
        return int(usable / self.slot_duration_s)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}, got {self.mode!r}")
        if self.nodes < 2:
            raise ConfigError("nodes", f"must be >= 2, got {self.nodes}")
        if self.room_width <= 0:
            raise ConfigError("room_width", "must be positive")
        if self.room_height <= 0:
            raise ConfigError("room_height", "must be positive")
        if self.coverage_radius <= 0:
            raise ConfigError("coverage_radius", "must be positive")
        if self.flows < 1:
            raise ConfigError("flows", f"must be >= 1, got {self.flows}")
        if self.flows > self.nodes * (self.nodes - 1):
            raise ConfigError(
                "flows",
                f"{self.flows} exceeds the {self.nodes * (self.nodes - 1)} "
                "possible source/destination pairs",
            )
        if self.pathloss < 1:
            raise ConfigError("pathloss", f"must be >= 1, got {self.pathloss}")
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz", "must be positive")
        if self.tx_power_w <= 0:
            raise ConfigError("tx_power_w", "must be positive")
        if self.carrier_hz <= 0:
            raise ConfigError("carrier_hz", "must be positive")
        if self.slot_duration_s <= 0:
            raise ConfigError("slot_duration_s", "must be positive")
        if self.payload_bits <= 0:
            raise ConfigError("payload_bits", "must be positive")
        if self.superframe_duration_s <= 0:
            raise ConfigError("superframe_duration_s", "must be positive")
        if not 0.0 <= self.overhead_fraction < 1.0:
            raise ConfigError("overhead_fraction", "must be in [0, 1)")
        if self.superframes < 1:
            raise ConfigError("superframes", f"must be >= 1, got {self.superframes}")
        if self.seed < 0:
            raise ConfigError("seed", "must be >= 0")
        if self.interference_model not in ("dual", "tx_beam"):
            raise ConfigError(
                "interference_model",
                f"must be 'dual' or 'tx_beam', got {self.interference_model!r}",
            )
        if self.traffic_model not in ("saturated", "burst"):
            raise ConfigError(
                "traffic_model",
                f"must be 'saturated' or 'burst', got {self.traffic_model!r}",
            )
        if self.tp_service not in ("cyclic", "single_pass"):
            raise ConfigError(
                "tp_service",
                f"must be 'cyclic' or 'single_pass', got {self.tp_service!r}",
            )
        if self.burst_payloads < 1:
            raise ConfigError("burst_payloads", "must be >= 1")
        if self.starvation_superframes < 1:
            raise ConfigError("starvation_superframes", "must be >= 1")
        if (
            self.interference_psd_w_per_hz is not None
            and self.interference_psd_w_per_hz < 0
        ):
            raise ConfigError("interference_psd_w_per_hz", "must be >= 0 or 'auto'")


_INT_KEYS = {"nodes", "flows", "superframes", "seed", "burst_payloads",
             "starvation_superframes"}
_FLOAT_KEYS = {
    "room_width", "room_height", "coverage_radius", "pathloss", "bandwidth_hz",
    "tx_power_w", "tx_gain_dbi", "rx_gain_dbi", "noise_psd_dbm_per_mhz",
    "carrier_hz", "slot_duration_s", "payload_bits", "superframe_duration_s",
    "overhead_fraction",
}
_STR_KEYS = {"mode", "interference_model", "traffic_model", "tp_service",
             "layout_file", "out_summary", "out_trace", "dump_graph",
             "dump_schedule"}
_BOOL_KEYS = {"quiet"}

CONFIG_KEYS: tuple[str, ...] = tuple(f.name for f in fields(RunConfig))


def _coerce(key: str, raw: object) -> object:
    """Parse one raw (usually string) value into its typed config value."""
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _BOOL_KEYS:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if key == "interference_psd_w_per_hz":
            if text.lower() == _AUTO or text == "":
                return None
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def _read_config_file(path: str) -> dict[str, str]:
    """Read a flat `key = value` config file; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        with open(path) as fp:
            for lineno, line in enumerate(fp, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(
                        "config", f"{path}:{lineno}: expected 'key = value'"
                    )
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in CONFIG_KEYS:
                    raise ConfigError(key, f"unknown key in {path}:{lineno}")
                values[key] = value.strip()
    except FileNotFoundError:
        raise ConfigError("config", f"config file not found: {path}") from None
    return values


def _env_overrides(env: Mapping[str, str]) -> dict[str, str]:
    values = {}
    for key in CONFIG_KEYS:
        env_name = ENV_PREFIX + key.upper()
        if env_name in env:
            values[key] = env[env_name]
    return values


def parse_config(
    file_path: str | None = None,
    overrides: Mapping[str, object] | None = None,
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """Resolve a RunConfig: defaults <- file <- environment <- overrides.

    `overrides` carries command-line flag values (raw strings are fine).
    Unknown keys anywhere are hard errors.
    """
    merged: dict[str, object] = {}
    if file_path:
        for key, raw in _read_config_file(file_path).items():
            merged[key] = _coerce(key, raw)
    env_map = os.environ if env is None else env
    for key, raw in _env_overrides(env_map).items():
        merged[key] = _coerce(key, raw)
    if overrides:
        for key, raw in overrides.items():
            if key not in CONFIG_KEYS:
                raise ConfigError(key, "unknown configuration key")
            merged[key] = _coerce(key, raw)
    config = RunConfig(**merged)
    config.validate()
    return config


# -- summary CSV ------------------------------------------------------------

# Configuration echo: enough to re-run the cell identically.
ECHO_COLUMNS: tuple[str, ...] = (
    "mode", "nodes", "room_width", "room_height", "coverage_radius", "flows",
    "pathloss", "bandwidth_hz", "tx_power_w", "tx_gain_dbi", "rx_gain_dbi",
    "noise_psd_dbm_per_mhz", "interference_psd_w_per_hz", "carrier_hz",
    "slot_duration_s", "payload_bits", "superframe_duration_s",
    "overhead_fraction", "superframes", "seed", "interference_model",
    "traffic_model", "tp_service", "burst_payloads", "starvation_superframes",
    "layout_file",
)

RESULT_COLUMNS: tuple[str, ...] = (
    "network_throughput_bps", "carried_throughput_bps",
    "mean_flow_throughput_bps", "min_flow_throughput_bps",
    "max_flow_throughput_bps", "jain_index", "rejected_total",
    "deferred_total", "mean_group_size",
)

SUMMARY_COLUMNS: tuple[str, ...] = ECHO_COLUMNS + RESULT_COLUMNS


def summary_row(config: RunConfig, summary: RunSummary) -> dict[str, object]:
    """One summary CSV row: config echo plus run results."""
    row: dict[str, object] = {}
    for key in ECHO_COLUMNS:
        value = getattr(config, key)
        if key == "interference_psd_w_per_hz" and value is None:
            # Echo the resolved PSD so the row re-runs identically.
            from .channel import (
                DEFAULT_INTERFERENCE_NOISE_FRACTION,
                noise_psd_to_w_per_hz,
            )

            value = DEFAULT_INTERFERENCE_NOISE_FRACTION * noise_psd_to_w_per_hz(
                config.noise_psd_dbm_per_mhz
            )
        row[key] = value
    per_flow = summary.per_flow_throughput_bps
    row["network_throughput_bps"] = summary.network_throughput_bps
    row["carried_throughput_bps"] = summary.carried_throughput_bps
    row["mean_flow_throughput_bps"] = summary.network_throughput_bps / len(per_flow)
    row["min_flow_throughput_bps"] = min(per_flow)
    row["max_flow_throughput_bps"] = max(per_flow)
    row["jain_index"] = summary.jain_index
    row["rejected_total"] = summary.rejected_total
    row["deferred_total"] = summary.deferred_total
    row["mean_group_size"] = summary.mean_group_size
    return row


def _cell(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_summary_csv(rows: Iterable[Mapping[str, object]], fp: IO[str]) -> None:
    writer = csv.writer(fp)
    writer.writerow(SUMMARY_COLUMNS)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in SUMMARY_COLUMNS])


def read_summary_csv(fp: IO[str]) -> list[dict[str, str]]:
    reader = csv.DictReader(fp)
    missing = [c for c in SUMMARY_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"summary CSV is missing columns: {', '.join(missing)}")
    return [dict(row) for row in reader]


def write_trace_csv(trace: Iterable[SuperframeStats], fp: IO[str]) -> None:
    writer = csv.writer(fp)
    writer.writerow(
        ["sf", "mode", "requests", "groups", "scheduled", "deferred", "rejected",
         "bits_delivered"]
    )
    for s in trace:
        writer.writerow(
            [s.sf, s.mode, s.requests, s.groups, s.scheduled, s.deferred,
             s.rejected, _cell(s.bits_delivered)]
        )


# -- sweep -------------------------------------------------------------------

def _run_cell(config: RunConfig) -> dict[str, object]:
    summary, _ = run_simulation(config)
    return summary_row(config, summary)


def sweep_cells(
    base: RunConfig,
    flows_list: Sequence[int],
    pathloss_list: Sequence[float],
    seed_list: Sequence[int],
    mode_list: Sequence[str],
) -> list[RunConfig]:
    """The Cartesian product of sweep dimensions in sorted cell-key order."""
    if not (flows_list and pathloss_list and seed_list and mode_list):
        raise ConfigError("sweep", "empty sweep: every dimension needs a value")
    cells = []
    for mode in sorted(mode_list):
        for pathloss in sorted(pathloss_list):
            for flows in sorted(flows_list):
                for seed in sorted(seed_list):
                    cfg = replace(
                        base, mode=mode, pathloss=pathloss, flows=flows, seed=seed
                    )
                    cfg.validate()
                    cells.append(cfg)
    return cells


def run_sweep(
    cells: Sequence[RunConfig], jobs: int | None = None
) -> tuple[list[dict[str, object]], list[tuple[RunConfig, Exception]]]:
    """Run every cell, in parallel when jobs > 1.

    Returns the summary rows (in cell order) of the cells that succeeded,
    plus (config, exception) pairs for the ones that failed.
    """
    jobs = jobs or os.cpu_count() or 1
    rows: list[dict[str, object] | None] = [None] * len(cells)
    errors: list[tuple[RunConfig, Exception]] = []
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, c) for c in cells]
            for i, fut in enumerate(futures):
                try:
                    rows[i] = fut.result()
                except Exception as exc:  # noqa: BLE001 - cell isolation
                    errors.append((cells[i], exc))
    else:
        for i, cfg in enumerate(cells):
            try:
                rows[i] = _run_cell(cfg)
            except Exception as exc:  # noqa: BLE001 - cell isolation
                errors.append((cells[i], exc))
    return [r for r in rows if r is not None], errors


# -- compare -----------------------------------------------------------------

def compute_ratio_table(rows: Sequence[Mapping[str, str]]) -> list[dict[str, object]]:
    """Per (pathloss, flows): seed-matched CTS/DTS throughput ratios.

    Ratios are reported for end-to-end network throughput, aggregate
    carried (over-the-air) throughput, and mean per-flow throughput.
    """
    by_cell: dict[tuple[float, int, str], dict[int, tuple[float, ...]]] = {}
    for row in rows:
        key = (float(row["pathloss"]), int(row["flows"]), row["mode"])
        by_cell.setdefault(key, {})[int(row["seed"])] = (
            float(row["network_throughput_bps"]),
            float(row["carried_throughput_bps"]),
            float(row["mean_flow_throughput_bps"]),
        )
    cells = sorted({(pl, fl) for pl, fl, _ in by_cell})
    table = []
    for pathloss, flows in cells:
        cts = by_cell.get((pathloss, flows, "cts"))
        dts = by_cell.get((pathloss, flows, "dts"))
        if not cts or not dts:
            raise ValueError(
                f"compare needs both modes for pathloss={pathloss}, flows={flows}"
            )
        if set(cts) != set(dts):
            raise ValueError(
                f"seed sets differ between modes for pathloss={pathloss}, "
                f"flows={flows}"
            )
        n_seeds = len(cts)
        cts_net, cts_carried, cts_flow = (
            sum(v[i] for v in cts.values()) / n_seeds for i in range(3)
        )
        dts_net, dts_carried, dts_flow = (
            sum(v[i] for v in dts.values()) / n_seeds for i in range(3)
        )
        table.append(
            {
                "pathloss": pathloss,
                "flows": flows,
                "cts_network_bps": cts_net,
                "dts_network_bps": dts_net,
                "network_ratio": cts_net / dts_net if dts_net else float("inf"),
                "cts_carried_bps": cts_carried,
                "dts_carried_bps": dts_carried,
                "carried_ratio": cts_carried / dts_carried if dts_carried else float("inf"),
                "cts_flow_bps": cts_flow,
                "dts_flow_bps": dts_flow,
                "flow_ratio": cts_flow / dts_flow if dts_flow else float("inf"),
            }
        )
    return table


def compute_jfi_table(rows: Sequence[Mapping[str, str]]) -> list[dict[str, object]]:
    """Per (pathloss, flows): mean Jain index of the CTS rows."""
    acc: dict[tuple[float, int], list[float]] = {}
    for row in rows:
        if row["mode"] != "cts":
            continue
        key = (float(row["pathloss"]), int(row["flows"]))
        acc.setdefault(key, []).append(float(row["jain_index"]))
    if not acc:
        raise ValueError("compare needs at least one cts row for the JFI table")
    return [
        {
            "pathloss": pathloss,
            "flows": flows,
            "mean_jain_cts": sum(vals) / len(vals),
        }
        for (pathloss, flows), vals in sorted(acc.items())
    ]


def _write_table(table: list[dict[str, object]], fp: IO[str]) -> None:
    if not table:
        return
    writer = csv.writer(fp)
    cols = list(table[0].keys())
    writer.writerow(cols)
    for row in table:
        writer.writerow([_cell(row[c]) for c in cols])


# -- command-line entry points ------------------------------------------------

def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key=value config file")
    for key in CONFIG_KEYS:
        flag = "--" + key.replace("_", "-")
        if key in _BOOL_KEYS:
            parser.add_argument(flag, action="store_true", default=argparse.SUPPRESS)
        else:
            parser.add_argument(flag, metavar="V", default=argparse.SUPPRESS)


def _flag_overrides(args: argparse.Namespace) -> dict[str, object]:
    return {k: v for k, v in vars(args).items() if k in CONFIG_KEYS}


def _open_out(path: str):
    if path and path != "-":
        return open(path, "w", newline="")
    return sys.stdout


def _parse_list(text: str, kind) -> list:
    return [kind(part) for part in text.split(",") if part.strip() != ""]


def _cmd_run(args: argparse.Namespace) -> int:
    config = parse_config(args.config, _flag_overrides(args))
    summary, trace = run_simulation(config)
    row = summary_row(config, summary)
    out = _open_out(config.out_summary)
    try:
        write_summary_csv([row], out)
    finally:
        if out is not sys.stdout:
            out.close()
    if config.out_trace:
        with open(config.out_trace, "w", newline="") as fp:
            write_trace_csv(trace, fp)
    if config.dump_graph or config.dump_schedule:
        _write_dumps(config)
    if not config.quiet:
        log.info(
            "mode=%s flows=%d n=%.2f seed=%d throughput=%.4g bps jain=%.4f",
            config.mode, config.flows, config.pathloss, config.seed,
            summary.network_throughput_bps, summary.jain_index,
        )
    return 0


def _write_dumps(config: RunConfig) -> None:
    # Dumps need the in-memory simulation, so re-run the cell with
    # collection enabled (cells are deterministic, the rerun is identical).
    sim_rows = _collect_dump_rows(config)
    if config.dump_graph:
        with open(config.dump_graph, "w", newline="") as fp:
            writer = csv.writer(fp)
            writer.writerow(["sf", "src", "dst", "weight"])
            for row in sim_rows[0]:
                writer.writerow([row[0], row[1], row[2], _cell(row[3])])
    if config.dump_schedule:
        with open(config.dump_schedule, "w", newline="") as fp:
            writer = csv.writer(fp)
            writer.writerow(
                ["sf", "group_index", "flow_id", "requester", "next_dest",
                 "slots", "duration"]
            )
            for row in sim_rows[1]:
                writer.writerow(row)


def _collect_dump_rows(config: RunConfig):
    from .channel import ChannelParams
    from .geometry import load_layout_csv
    from .simkernel import Simulation, spawn_flows

    layout_rng = np.random.default_rng([config.seed, 0])
    flow_rng = np.random.default_rng([config.seed, 1])
    sched_rng = np.random.default_rng([config.seed, 2])
    if config.layout_file:
        with open(config.layout_file, newline="") as fp:
            layout = load_layout_csv(
                fp, config.room_width, config.room_height, config.coverage_radius
            )
    else:
        layout = place_nodes(
            config.nodes, config.room_width, config.room_height, layout_rng,
            config.coverage_radius,
        )
    flows = spawn_flows(
        config.flows, layout, flow_rng,
        saturated=config.traffic_model == "saturated",
    )
    params = ChannelParams(
        bandwidth_hz=config.bandwidth_hz,
        tx_power_w=config.tx_power_w,
        tx_gain_dbi=config.tx_gain_dbi,
        rx_gain_dbi=config.rx_gain_dbi,
        noise_psd_dbm_per_mhz=config.noise_psd_dbm_per_mhz,
        interference_psd_w_per_hz=config.interference_psd_w_per_hz,
        pathloss_exponent=config.pathloss,
        carrier_hz=config.carrier_hz,
        slot_duration_s=config.slot_duration_s,
        payload_bits=config.payload_bits,
    )
    sim = Simulation(
        layout, flows, params,
        mode=config.mode,
        budget_slots=config.budget_slots,
        superframe_duration_s=config.superframe_duration_s,
        rng=sched_rng,
        interference_model=config.interference_model,
        traffic_model=config.traffic_model,
        tp_service=config.tp_service,
        burst_payloads=config.burst_payloads,
        starvation_superframes=config.starvation_superframes,
        collect_graph=bool(config.dump_graph),
        collect_schedule=bool(config.dump_schedule),
    )
    for _ in range(config.superframes):
        sim.step()
    return sim.graph_rows, sim.schedule_rows


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = parse_config(args.config, _flag_overrides(args))
    flows_list = _parse_list(args.flows_list, int) if args.flows_list else [base.flows]
    pathloss_list = (
        _parse_list(args.pathloss_list, float) if args.pathloss_list else [base.pathloss]
    )
    seed_list = _parse_list(args.seed_list, int) if args.seed_list else [base.seed]
    mode_list = (
        _parse_list(args.mode_list, str) if args.mode_list else [base.mode]
    )
    cells = sweep_cells(base, flows_list, pathloss_list, seed_list, mode_list)
    rows, errors = run_sweep(cells, jobs=args.jobs)
    out = _open_out(base.out_summary)
    try:
        write_summary_csv(rows, out)
    finally:
        if out is not sys.stdout:
            out.close()
    for cfg, exc in errors:
        print(
            f"error: cell mode={cfg.mode} pathloss={cfg.pathloss} "
            f"flows={cfg.flows} seed={cfg.seed}: {exc}",
            file=sys.stderr,
        )
    return 1 if errors else 0


def _cmd_compare(args: argparse.Namespace) -> int:
    with open(args.summary, newline="") as fp:
        rows = read_summary_csv(fp)
    ratios = compute_ratio_table(rows)
    jfi = compute_jfi_table(rows)
    out = _open_out(args.out_ratios)
    try:
        _write_table(ratios, out)
    finally:
        if out is not sys.stdout:
            out.close()
    out = _open_out(args.out_jfi)
    try:
        _write_table(jfi, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_dump_layout(args: argparse.Namespace) -> int:
    config = parse_config(args.config, _flag_overrides(args))
    rng = np.random.default_rng([config.seed, 0])
    layout = place_nodes(
        config.nodes, config.room_width, config.room_height, rng,
        config.coverage_radius,
    )
    out = _open_out(args.out or "")
    try:
        save_layout_csv(layout, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctsim",
        description="Concurrent-transmission piconet scheduling simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one simulation cell")
    _add_config_flags(run_p)
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a Cartesian sweep of cells")
    _add_config_flags(sweep_p)
    sweep_p.add_argument("--flows-list", metavar="A,B,...", dest="flows_list")
    sweep_p.add_argument("--pathloss-list", metavar="A,B,...", dest="pathloss_list")
    sweep_p.add_argument("--seed-list", metavar="A,B,...", dest="seed_list")
    sweep_p.add_argument("--mode-list", metavar="A,B,...", dest="mode_list")
    sweep_p.add_argument("--jobs", type=int, default=None)
    sweep_p.set_defaults(func=_cmd_sweep)

    cmp_p = sub.add_parser("compare", help="CTS/DTS ratio and JFI tables")
    cmp_p.add_argument("summary", help="summary CSV from run/sweep")
    cmp_p.add_argument("--out-ratios", default="", metavar="PATH")
    cmp_p.add_argument("--out-jfi", default="", metavar="PATH")
    cmp_p.set_defaults(func=_cmd_compare)

    dump_p = sub.add_parser("dump-layout", help="emit the node layout CSV")
    _add_config_flags(dump_p)
    dump_p.add_argument("--out", default="", metavar="PATH")
    dump_p.set_defaults(func=_cmd_dump_layout)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if getattr(args, "quiet", False) else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
