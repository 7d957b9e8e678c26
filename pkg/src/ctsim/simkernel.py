"""Superframe loop, queue dynamics, relaying, and run metrics.

Each superframe splits into a control overhead (beacon plus request
collection, modeled as instantaneous and collision free) and a
transmission period holding a fixed budget of time slots.  In concurrent
mode the kernel snapshots queue loads, rebuilds the routing graph, emits
one transmission request per (holder, flow) pair, schedules them into
concurrent groups, and then serves the schedule cyclically until the slot
budget is spent.  In direct mode requests go source to destination and
are served one at a time in priority order, plain TDMA style.

Delivered bits are credited at superframe end; the simulated clock
advances by exactly one superframe duration per step in both modes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import ChannelParams, link_rate, slots_for_payload
from .geometry import NodeLayout, load_layout_csv, place_nodes
from .pathing import LoadTable, build_graph, next_hops_toward
from .scheduling import Schedule, TReq, build_schedule, prioritize

log = logging.getLogger(__name__)

TRAFFIC_MODELS = ("saturated", "burst")
TP_SERVICE_MODES = ("cyclic", "single_pass")


@dataclass(frozen=True)
class Flow:
    """An end-to-end traffic pair."""

    flow_id: int
    source: int
    destination: int
    saturated: bool = True

    def __post_init__(self) -> None:
        if self.source == self.destination:
            raise ValueError("flow source and destination must differ")


@dataclass
class PayloadRecord:
    """One payload moving through the network, hop by hop."""

    flow_id: int
    bits: float
    hop_count: int = 0
    trail: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class RunSummary:
    """Aggregate metrics of one finished run.

    `network_throughput_bps` counts only bits delivered end to end;
    `carried_throughput_bps` counts every bit moved over the air, so a
    payload relayed over k hops contributes k times.  The two coincide
    in direct mode.
    """

    mode: str
    network_throughput_bps: float
    carried_throughput_bps: float
    per_flow_throughput_bps: tuple[float, ...]
    jain_index: float
    superframes_run: int
    rejected_total: int
    deferred_total: int
    mean_group_size: float


@dataclass(frozen=True)
class SuperframeStats:
    """Per-superframe trace row."""

    sf: int
    mode: str
    requests: int
    groups: int
    scheduled: int
    deferred: int
    rejected: int
    bits_delivered: float


def jain_index(throughputs: Sequence[float]) -> float:
    """Jain fairness index (sum x)^2 / (n * sum x^2) of an allocation.

    1.0 means perfectly even; 1/n means one participant takes everything.
    Undefined (raises) for an empty or all-zero vector.
    """
    vals = [float(v) for v in throughputs]
    if not vals:
        raise ValueError("jain_index needs at least one value")
    if any(v < 0 for v in vals):
        raise ValueError("jain_index values must be nonnegative")
    sum_sq = sum(v * v for v in vals)
    if sum_sq == 0:
        raise ValueError("jain_index undefined for an all-zero vector")
    total = sum(vals)
    return (total * total) / (len(vals) * sum_sq)


def spawn_flows(
    count: int,
    layout: NodeLayout,
    rng: np.random.Generator,
    saturated: bool = True,
) -> list[Flow]:
    """Draw `count` distinct ordered (source, destination) pairs uniformly.

    Raises:
        ValueError: if count < 1 or count exceeds the N*(N-1) possible
        ordered pairs.
    """
    n = layout.n
    max_pairs = n * (n - 1)
    if count < 1:
        raise ValueError("flow count must be >= 1")
    if count > max_pairs:
        raise ValueError(
            f"flow count {count} exceeds the {max_pairs} possible ordered pairs"
        )
    # A permutation prefix keeps the draw uniform over distinct ordered
    # pairs while making flow sets nest across counts for a fixed seed,
    # which keeps sweep curves over the flow count comparable.
    picks = rng.permutation(max_pairs)[:count]
    flows = []
    for fid, k in enumerate(int(p) for p in picks):
        src = k // (n - 1)
        rem = k % (n - 1)
        dst = rem if rem < src else rem + 1
        flows.append(Flow(fid, src, dst, saturated))
    return flows


class Simulation:
    """Mutable state of one run; step it one superframe at a time."""

    def __init__(
        self,
        layout: NodeLayout,
        flows: Sequence[Flow],
        params: ChannelParams,
        *,
        mode: str,
        budget_slots: int,
        superframe_duration_s: float,
        rng: np.random.Generator,
        interference_model: str = "dual",
        traffic_model: str = "saturated",
        tp_service: str = "cyclic",
        burst_payloads: int = 8,
        starvation_superframes: int = 50,
        collect_graph: bool = False,
        collect_schedule: bool = False,
    ) -> None:
        if mode not in ("cts", "dts"):
            raise ValueError(f"unknown mode {mode!r}")
        if traffic_model not in TRAFFIC_MODELS:
            raise ValueError(f"unknown traffic_model {traffic_model!r}")
        if tp_service not in TP_SERVICE_MODES:
            raise ValueError(f"unknown tp_service {tp_service!r}")
        if budget_slots < 0:
            raise ValueError("budget_slots must be >= 0")
        if superframe_duration_s <= 0:
            raise ValueError("superframe_duration_s must be positive")
        for i, f in enumerate(flows):
            if f.flow_id != i:
                raise ValueError("flow ids must be dense integers starting at 0")
            if not (0 <= f.source < layout.n and 0 <= f.destination < layout.n):
                raise ValueError(f"flow {i} endpoints not in layout")

        self.layout = layout
        self.flows = list(flows)
        self.params = params
        self.mode = mode
        self.budget_slots = budget_slots
        self.superframe_duration_s = superframe_duration_s
        self.rng = rng
        self.interference_model = interference_model
        self.traffic_model = traffic_model
        self.tp_service = tp_service
        self.starvation_superframes = starvation_superframes
        self.collect_graph = collect_graph
        self.collect_schedule = collect_schedule

        n = layout.n
        nflows = len(self.flows)
        self.queues: list[list[PayloadRecord]] = [[] for _ in range(n)]
        self.queued_bits: list[float] = [0.0] * n
        self._counts: list[list[int]] = [[0] * nflows for _ in range(n)]
        self.delivered_bits: list[float] = [0.0] * nflows
        self.carried_bits: float = 0.0
        self.injected_bits: list[float] = [0.0] * nflows
        self.delivered_trails: list[list[int]] = []
        self.sf_index = 0
        self.rejected_total = 0
        self.deferred_total = 0
        self._groups_total = 0
        self._members_total = 0
        self._unserved_streak = [0] * nflows
        self.starved_flows: set[int] = set()
        self.graph_rows: list[tuple[int, int, int, float]] = []
        self.schedule_rows: list[tuple[int, int, int, int, int, int, int]] = []

        # Direct mode prices links with no concurrency penalty at all.
        self._dts_params = replace(params, interference_psd_w_per_hz=0.0)
        self._slot_cache: dict[tuple[int, int, int], int] = {}
        self._dts_slot_cache: dict[int, int] = {}

        if traffic_model == "burst":
            if burst_payloads < 1:
                raise ValueError("burst_payloads must be >= 1")
            for flow in self.flows:
                for _ in range(burst_payloads):
                    self._inject(flow)

    # -- queue plumbing ----------------------------------------------------

    def _inject(self, flow: Flow) -> None:
        rec = PayloadRecord(flow.flow_id, self.params.payload_bits, 0, [flow.source])
        self._push(flow.source, rec)
        self.injected_bits[flow.flow_id] += rec.bits

    def _push(self, node: int, rec: PayloadRecord) -> None:
        self.queues[node].append(rec)
        self.queued_bits[node] += rec.bits
        self._counts[node][rec.flow_id] += 1

    def _pop_first(self, node: int, flow_id: int) -> PayloadRecord | None:
        if self._counts[node][flow_id] == 0:
            return None
        q = self.queues[node]
        for i, rec in enumerate(q):
            if rec.flow_id == flow_id:
                del q[i]
                self.queued_bits[node] -= rec.bits
                self._counts[node][flow_id] -= 1
                return rec
        return None

    def _refill_saturated(self) -> None:
        for flow in self.flows:
            if flow.saturated and self._counts[flow.source][flow.flow_id] == 0:
                self._inject(flow)

    # -- per-link slot pricing ----------------------------------------------

    def _cts_slots(self, src: int, dst: int) -> int:
        key = (src, dst, 1)
        if key not in self._slot_cache:
            rate = link_rate(self.params, self.layout.distance_matrix[src][dst], 1)
            self._slot_cache[key] = slots_for_payload(self.params, rate)
        return self._slot_cache[key]

    def _dts_slots(self, flow: Flow) -> int:
        if flow.flow_id not in self._dts_slot_cache:
            dist = self.layout.distance_matrix[flow.source][flow.destination]
            rate = link_rate(self._dts_params, dist, 1)
            self._dts_slot_cache[flow.flow_id] = slots_for_payload(self._dts_params, rate)
        return self._dts_slot_cache[flow.flow_id]

    # -- delivery ------------------------------------------------------------

    def _advance(self, req: TReq) -> float:
        """Move one payload of req's flow one hop; returns delivered bits."""
        rec = self._pop_first(req.requester, req.flow_id)
        if rec is None:
            return 0.0
        flow = self.flows[req.flow_id]
        if flow.saturated and req.requester == flow.source:
            self._inject(flow)
        rec.hop_count += 1
        rec.trail.append(req.next_dest)
        self.carried_bits += rec.bits
        if req.next_dest == flow.destination:
            self.delivered_bits[req.flow_id] += rec.bits
            self.delivered_trails.append(rec.trail)
            return rec.bits
        self._push(req.next_dest, rec)
        return 0.0

    def step(self) -> SuperframeStats:
        if self.mode == "cts":
            stats = run_superframe_cts(self)
        else:
            stats = run_superframe_dts(self)
        self.sf_index += 1
        return stats

    def summarize(self) -> RunSummary:
        if self.sf_index == 0:
            raise ValueError("nothing to summarize: no superframes were run")
        sim_time = self.sf_index * self.superframe_duration_s
        per_flow = tuple(b / sim_time for b in self.delivered_bits)
        network = sum(per_flow)
        fairness = jain_index(per_flow) if network > 0 else math.nan
        mean_group = (
            self._members_total / self._groups_total if self._groups_total else 0.0
        )
        return RunSummary(
            mode=self.mode,
            network_throughput_bps=network,
            carried_throughput_bps=self.carried_bits / sim_time,
            per_flow_throughput_bps=per_flow,
            jain_index=fairness,
            superframes_run=self.sf_index,
            rejected_total=self.rejected_total,
            deferred_total=self.deferred_total,
            mean_group_size=mean_group,
        )


def run_superframe_cts(state: Simulation) -> SuperframeStats:
    """One concurrent-mode superframe: route, schedule, serve, account."""
    state._refill_saturated()
    layout = state.layout
    loads = LoadTable(
        load_per_node=tuple(state.queued_bits),
        avg_load=sum(state.queued_bits) / layout.n,
        avg_distance=layout.mean_pair_distance,
    )
    graph = build_graph(layout, loads)
    if state.collect_graph:
        for i in range(layout.n):
            for j in range(layout.n):
                if i != j:
                    state.graph_rows.append((state.sf_index, i, j, graph.weights[i][j]))

    hops_cache: dict[int, list[int | None]] = {}
    requests: list[TReq] = []
    for node in range(layout.n):
        seen: set[int] = set()
        for rec in state.queues[node]:
            fid = rec.flow_id
            if fid in seen:
                continue
            seen.add(fid)
            dst = state.flows[fid].destination
            if dst not in hops_cache:
                hops_cache[dst] = next_hops_toward(graph, dst)
            hop = hops_cache[dst][node]
            requests.append(TReq(node, hop, state._cts_slots(node, hop), fid))

    schedule = build_schedule(
        requests,
        layout,
        state.params,
        state.budget_slots,
        state.rng,
        state.interference_model,
    )
    if state.collect_schedule:
        for gi, g in enumerate(schedule.groups):
            for m, slots in zip(g.members, g.member_slots):
                state.schedule_rows.append(
                    (state.sf_index, gi, m.flow_id, m.requester, m.next_dest,
                     slots, g.duration_slots)
                )

    bits = _serve_cts(state, schedule)

    state.rejected_total += len(schedule.rejected)
    state.deferred_total += len(schedule.deferred)
    state._groups_total += len(schedule.groups)
    state._members_total += schedule.scheduled_count
    return SuperframeStats(
        sf=state.sf_index,
        mode="cts",
        requests=len(requests),
        groups=len(schedule.groups),
        scheduled=schedule.scheduled_count,
        deferred=len(schedule.deferred),
        rejected=len(schedule.rejected),
        bits_delivered=bits,
    )


def _serve_cts(state: Simulation, schedule: Schedule) -> float:
    """Serve the scheduled groups until the slot budget is spent.

    Groups run sequentially in schedule order; in cyclic service the
    schedule repeats, each cycle running every group that still fits the
    remaining budget, so saturated traffic keeps the transmission period
    busy.  Single-pass service stops after one traversal.
    """
    groups = schedule.groups
    if not groups:
        return 0.0
    bits = 0.0
    remaining = state.budget_slots
    # Airtime credit per member: a member owns the group's whole air time
    # every cycle and streams payloads back to back through it, carrying
    # partial-payload airtime over to its next allocation.  Unused air
    # time (empty queue) is lost, not banked.
    credit: dict[int, list[float]] = {
        gi: [0.0] * len(g.members) for gi, g in enumerate(groups)
    }
    while True:
        progressed = False
        for gi, g in enumerate(groups):
            if g.duration_slots > remaining:
                continue
            remaining -= g.duration_slots
            progressed = True
            for i, (m, slots) in enumerate(zip(g.members, g.member_slots)):
                credit[gi][i] += g.duration_slots
                while credit[gi][i] >= slots:
                    if state._counts[m.requester][m.flow_id] == 0:
                        credit[gi][i] = 0.0
                        break
                    bits += state._advance(m)
                    credit[gi][i] -= slots
        if not progressed or state.tp_service == "single_pass":
            break
    return bits


def run_superframe_dts(state: Simulation) -> SuperframeStats:
    """One direct-mode superframe: equal-share TDMA service, no relaying.

    Each requesting flow gets an equal slice of the transmission period
    (plain TDMA) and pushes as many whole payloads as fit its slice; the
    leftover slots are then filled greedily in priority order.  In
    single-pass service each request is served at most once.
    """
    state._refill_saturated()
    requests: list[TReq] = []
    for flow in state.flows:
        if state._counts[flow.source][flow.flow_id] > 0:
            requests.append(
                TReq(flow.source, flow.destination, state._dts_slots(flow), flow.flow_id)
            )
    order = prioritize(requests)
    served = {r.flow_id: 0 for r in order}
    bits = 0.0
    if order:
        remaining = state.budget_slots
        if state.tp_service == "single_pass":
            for req in order:
                if req.slots <= remaining and state._counts[req.requester][req.flow_id]:
                    bits += state._advance(req)
                    served[req.flow_id] += 1
                    remaining -= req.slots
        else:
            share = state.budget_slots // len(order)
            for req in order:
                grants = share // req.slots
                while grants > 0 and state._counts[req.requester][req.flow_id]:
                    bits += state._advance(req)
                    served[req.flow_id] += 1
                    remaining -= req.slots
                    grants -= 1
            # Hand the leftover slots out greedily, slowest links first.
            while True:
                progressed = False
                for req in order:
                    if req.slots > remaining:
                        continue
                    if state._counts[req.requester][req.flow_id] == 0:
                        continue
                    bits += state._advance(req)
                    served[req.flow_id] += 1
                    remaining -= req.slots
                    progressed = True
                if not progressed:
                    break

    deferred = sum(1 for k in served.values() if k == 0)
    state.deferred_total += deferred
    for flow in state.flows:
        if served.get(flow.flow_id, 0) > 0:
            state._unserved_streak[flow.flow_id] = 0
            continue
        state._unserved_streak[flow.flow_id] += 1
        if (
            state._unserved_streak[flow.flow_id] >= state.starvation_superframes
            and flow.flow_id not in state.starved_flows
        ):
            state.starved_flows.add(flow.flow_id)
            log.warning(
                "flow %d starved: unserved for %d consecutive superframes",
                flow.flow_id,
                state.starvation_superframes,
            )
    return SuperframeStats(
        sf=state.sf_index,
        mode="dts",
        requests=len(requests),
        groups=0,
        scheduled=sum(1 for k in served.values() if k > 0),
        deferred=deferred,
        rejected=0,
        bits_delivered=bits,
    )


def run_simulation(config) -> tuple[RunSummary, list[SuperframeStats]]:
    """Run one fully configured cell and return its summary plus trace.

    `config` is a RunConfig (see the cli module) or any object exposing
    the same attributes.  Identical config and seed give a bit-identical
    RunSummary.
    """
    if config.superframes < 1:
        raise ValueError("superframes: must be >= 1 (nothing to measure)")
    layout_rng = np.random.default_rng([config.seed, 0])
    flow_rng = np.random.default_rng([config.seed, 1])
    sched_rng = np.random.default_rng([config.seed, 2])

    if getattr(config, "layout_file", ""):
        with open(config.layout_file, newline="") as fp:
            layout = load_layout_csv(
                fp, config.room_width, config.room_height, config.coverage_radius
            )
    else:
        layout = place_nodes(
            config.nodes,
            config.room_width,
            config.room_height,
            layout_rng,
            config.coverage_radius,
        )
    flows = spawn_flows(
        config.flows, layout, flow_rng, saturated=config.traffic_model == "saturated"
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
        layout,
        flows,
        params,
        mode=config.mode,
        budget_slots=config.budget_slots,
        superframe_duration_s=config.superframe_duration_s,
        rng=sched_rng,
        interference_model=config.interference_model,
        traffic_model=config.traffic_model,
        tp_service=config.tp_service,
        burst_payloads=config.burst_payloads,
        starvation_superframes=config.starvation_superframes,
        collect_graph=bool(getattr(config, "dump_graph", "")),
        collect_schedule=bool(getattr(config, "dump_schedule", "")),
    )
    trace = [sim.step() for _ in range(config.superframes)]
    return sim.summarize(), trace
