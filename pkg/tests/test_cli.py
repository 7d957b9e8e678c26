"""Config layering/validation, CSV schemas, sweep, compare, CLI entry points."""

import csv
import io
import subprocess
import sys

import pytest


from ctsim.cli import (
    ConfigError,
    ECHO_COLUMNS,
    SUMMARY_COLUMNS,
    compute_jfi_table,
    compute_ratio_table,
    main,
    parse_config,
    read_summary_csv,
    run_sweep,
    summary_row,
    sweep_cells,
    write_summary_csv,
    write_trace_csv,
)
from ctsim.simkernel import run_simulation


class TestDefaults:
    def test_table_one_defaults(self):
        cfg = parse_config(None, None, env={})
        assert cfg.nodes == 30
        assert cfg.room_width == cfg.room_height == 16.0
        assert cfg.bandwidth_hz == 7e9
        assert cfg.tx_power_w == 1e-4
        assert cfg.tx_gain_dbi == cfg.rx_gain_dbi == 12.0
        assert cfg.noise_psd_dbm_per_mhz == -134.0
        assert cfg.pathloss == 2.0
        assert cfg.payload_bits == 1e7
        assert cfg.mode == "cts"

    def test_budget_slots_derivation(self):
        cfg = parse_config(None, None, env={})
        assert cfg.budget_slots == 5898


class TestLayering:
    def test_file_overrides_defaults(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("pathloss = 2.5\nflows = 8   # more traffic\n\n")
        cfg = parse_config(str(f), None, env={})
        assert cfg.pathloss == 2.5
        assert cfg.flows == 8

    def test_flag_overrides_file(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("pathloss = 2\n")
        cfg = parse_config(str(f), {"pathloss": "2.5"}, env={})
        assert cfg.pathloss == 2.5

    def test_env_between_file_and_flags(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("flows = 3\nseed = 1\n")
        env = {"CTSIM_FLOWS": "5", "CTSIM_SEED": "9"}
        cfg = parse_config(str(f), {"seed": "2"}, env=env)
        assert cfg.flows == 5      # env beats file
        assert cfg.seed == 2       # flag beats env

    def test_unknown_key_in_file(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("warp_drive = on\n")
        with pytest.raises(ConfigError, match="warp_drive"):
            parse_config(str(f), None, env={})

    def test_unknown_override_key(self):
        with pytest.raises(ConfigError, match="bogus"):
            parse_config(None, {"bogus": "1"}, env={})

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            parse_config("/nonexistent/path.cfg", None, env={})

    def test_malformed_line(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("just some words\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse_config(str(f), None, env={})


class TestValidation:
    @pytest.mark.parametrize(
        "key,value,hint",
        [
            ("nodes", "1", "nodes"),
            ("flows", "0", "flows"),
            ("flows", "871", "exceeds"),
            ("pathloss", "0.5", "pathloss"),
            ("mode", "express", "mode"),
            ("overhead_fraction", "1.0", "overhead"),
            ("superframes", "0", "superframes"),
            ("interference_model", "felt", "interference_model"),
            ("tp_service", "warp", "tp_service"),
            ("seed", "-1", "seed"),
        ],
    )
    def test_out_of_range_values(self, key, value, hint):
        with pytest.raises(ConfigError, match=hint):
            parse_config(None, {key: value}, env={})

    def test_type_errors_name_the_key(self):
        with pytest.raises(ConfigError, match="flows"):
            parse_config(None, {"flows": "many"}, env={})

    def test_interference_auto(self):
        cfg = parse_config(None, {"interference_psd_w_per_hz": "auto"}, env={})
        assert cfg.interference_psd_w_per_hz is None
        cfg = parse_config(None, {"interference_psd_w_per_hz": "1e-24"}, env={})
        assert cfg.interference_psd_w_per_hz == 1e-24


def tiny_overrides(**kw):
    base = {"flows": "2", "superframes": "8", "nodes": "10", "seed": "1"}
    base.update({k: str(v) for k, v in kw.items()})
    return base


class TestSummaryCsv:
    def test_row_echo_reruns_identically(self):
        cfg = parse_config(None, tiny_overrides(), env={})
        summary, _ = run_simulation(cfg)
        row = summary_row(cfg, summary)
        echo = {k: str(row[k]) for k in ECHO_COLUMNS}
        cfg2 = parse_config(None, echo, env={})
        summary2, _ = run_simulation(cfg2)
        assert summary2 == summary

    def test_round_trip_through_csv(self):
        cfg = parse_config(None, tiny_overrides(), env={})
        summary, _ = run_simulation(cfg)
        buf = io.StringIO()
        write_summary_csv([summary_row(cfg, summary)], buf)
        buf.seek(0)
        rows = read_summary_csv(buf)
        assert len(rows) == 1
        echo = {k: rows[0][k] for k in ECHO_COLUMNS}
        summary2, _ = run_simulation(parse_config(None, echo, env={}))
        assert summary2 == summary

    def test_missing_column_rejected(self):
        buf = io.StringIO("mode,flows\ncts,2\n")
        with pytest.raises(ValueError, match="missing columns"):
            read_summary_csv(buf)

    def test_trace_schema(self):
        cfg = parse_config(None, tiny_overrides(), env={})
        _, trace = run_simulation(cfg)
        buf = io.StringIO()
        write_trace_csv(trace, buf)
        header = buf.getvalue().splitlines()[0]
        assert header == "sf,mode,requests,groups,scheduled,deferred,rejected,bits_delivered"
        assert len(buf.getvalue().splitlines()) == 9


class TestSweep:
    def test_cell_count_and_order(self):
        base = parse_config(None, tiny_overrides(), env={})
        cells = sweep_cells(base, [2, 4], [2.0, 3.0], [0, 1], ["cts", "dts"])
        assert len(cells) == 16
        keys = [(c.mode, c.pathloss, c.flows, c.seed) for c in cells]
        assert keys == sorted(keys)

    def test_empty_sweep_rejected(self):
        base = parse_config(None, tiny_overrides(), env={})
        with pytest.raises(ConfigError, match="empty sweep"):
            sweep_cells(base, [], [2.0], [0], ["cts"])

    def test_rows_in_cell_order_and_parallel_matches_serial(self):
        base = parse_config(None, tiny_overrides(superframes=4), env={})
        cells = sweep_cells(base, [2], [2.0, 2.5], [0, 1], ["cts", "dts"])
        serial, err_s = run_sweep(cells, jobs=1)
        parallel, err_p = run_sweep(cells, jobs=2)
        assert not err_s and not err_p
        assert serial == parallel
        got = [(r["mode"], r["pathloss"], r["flows"], r["seed"]) for r in serial]
        assert got == [(c.mode, c.pathloss, c.flows, c.seed) for c in cells]

    def test_cell_errors_are_isolated(self):
        base = parse_config(None, tiny_overrides(), env={})
        bad = base.__class__(**{**base.__dict__, "layout_file": "/missing.csv"})
        rows, errors = run_sweep([base, bad], jobs=1)
        assert len(rows) == 1
        assert len(errors) == 1
        assert errors[0][0] is bad


def synthetic_rows():
    rows = []
    for mode, net, carried, flow, jain in (
        ("cts", 4e10, 9e10, 1e10, 0.97),
        ("dts", 2e10, 2e10, 0.5e10, 0.99),
    ):
        for seed in (0, 1):
            rows.append(
                {
                    "mode": mode, "pathloss": "2.0", "flows": "4", "seed": str(seed),
                    "network_throughput_bps": repr(net * (1 + 0.1 * seed)),
                    "carried_throughput_bps": repr(carried * (1 + 0.1 * seed)),
                    "mean_flow_throughput_bps": repr(flow * (1 + 0.1 * seed)),
                    "jain_index": repr(jain),
                }
            )
    return rows


class TestCompare:
    def test_ratio_math(self):
        table = compute_ratio_table(synthetic_rows())
        assert len(table) == 1
        row = table[0]
        assert row["network_ratio"] == pytest.approx(2.0)
        assert row["carried_ratio"] == pytest.approx(4.5)
        assert row["flow_ratio"] == pytest.approx(2.0)

    def test_seed_mismatch_rejected(self):
        rows = synthetic_rows()
        rows[-1]["seed"] = "7"
        with pytest.raises(ValueError, match="seed sets differ"):
            compute_ratio_table(rows)

    def test_missing_mode_rejected(self):
        rows = [r for r in synthetic_rows() if r["mode"] == "cts"]
        with pytest.raises(ValueError, match="both modes"):
            compute_ratio_table(rows)

    def test_jfi_table(self):
        table = compute_jfi_table(synthetic_rows())
        assert table == [
            {"pathloss": 2.0, "flows": 4, "mean_jain_cts": pytest.approx(0.97)}
        ]


class TestCommandLine:
    def test_run_writes_summary(self, tmp_path, capsys):
        out = tmp_path / "summary.csv"
        rc = main(
            ["run", "--flows", "2", "--superframes", "5", "--nodes", "8",
             "--out-summary", str(out), "--quiet"]
        )
        assert rc == 0
        rows = read_summary_csv(open(out))
        assert len(rows) == 1
        assert rows[0]["mode"] == "cts"

    def test_run_stdout(self, capsys):
        rc = main(["run", "--flows", "2", "--superframes", "3", "--nodes", "6",
                   "--quiet"])
        assert rc == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert header == ",".join(SUMMARY_COLUMNS)

    def test_sweep_compare_end_to_end(self, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = main(
            ["sweep", "--flows", "2", "--superframes", "5", "--nodes", "8",
             "--out-summary", str(out), "--flows-list", "2,3",
             "--pathloss-list", "2.0", "--seed-list", "0,1",
             "--mode-list", "cts,dts", "--jobs", "1", "--quiet"]
        )
        assert rc == 0
        rows = read_summary_csv(open(out))
        assert len(rows) == 8
        ratios = tmp_path / "ratios.csv"
        jfi = tmp_path / "jfi.csv"
        rc = main(["compare", str(out), "--out-ratios", str(ratios),
                   "--out-jfi", str(jfi)])
        assert rc == 0
        got = list(csv.DictReader(open(ratios)))
        assert len(got) == 2
        assert {r["flows"] for r in got} == {"2", "3"}

    def test_sweep_exit_code_on_cell_errors(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        rc = main(
            ["sweep", "--flows", "2", "--superframes", "2", "--nodes", "8",
             "--layout-file", str(tmp_path / "missing.csv"),
             "--out-summary", str(out), "--seed-list", "0,1", "--jobs", "1",
             "--quiet"]
        )
        assert rc == 1
        assert "error: cell" in capsys.readouterr().err
        # Partial results (here: none) are still flushed with the header.
        assert out.read_text().startswith("mode,")

    def test_dump_layout(self, tmp_path):
        out = tmp_path / "layout.csv"
        rc = main(["dump-layout", "--nodes", "12", "--seed", "3", "--out", str(out)])
        assert rc == 0
        rows = list(csv.DictReader(open(out)))
        assert len(rows) == 12
        assert [r["node_id"] for r in rows] == [str(i) for i in range(12)]

    def test_layout_file_replay(self, tmp_path):
        layout_csv = tmp_path / "layout.csv"
        assert main(["dump-layout", "--nodes", "10", "--seed", "3",
                     "--out", str(layout_csv)]) == 0
        base = tiny_overrides(nodes=10, seed=3)
        direct, _ = run_simulation(parse_config(None, base, env={}))
        replay, _ = run_simulation(
            parse_config(None, {**base, "layout_file": str(layout_csv)}, env={})
        )
        assert replay == direct

    def test_config_error_exit_code(self, capsys):
        assert main(["run", "--nodes", "1"]) == 2
        assert "nodes" in capsys.readouterr().err

    def test_graph_and_schedule_dumps(self, tmp_path):
        g = tmp_path / "graph.csv"
        s = tmp_path / "sched.csv"
        rc = main(
            ["run", "--flows", "2", "--superframes", "2", "--nodes", "6",
             "--dump-graph", str(g), "--dump-schedule", str(s), "--quiet"]
        )
        assert rc == 0
        graph_rows = list(csv.DictReader(open(g)))
        assert set(graph_rows[0]) == {"sf", "src", "dst", "weight"}
        assert len(graph_rows) == 2 * 6 * 5
        sched_rows = list(csv.DictReader(open(s)))
        assert set(sched_rows[0]) == {
            "sf", "group_index", "flow_id", "requester", "next_dest",
            "slots", "duration",
        }

    def test_module_entrypoint(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ctsim.cli", "run", "--flows", "2",
             "--superframes", "2", "--nodes", "6", "--quiet"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("mode,")
