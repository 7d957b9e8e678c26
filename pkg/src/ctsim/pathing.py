"""Per-superframe weighted routing graph and next-hop selection.

Every ordered node pair gets a weight combining normalized squared
distance with the destination node's normalized queued traffic, so
shortest paths prefer short hops through lightly loaded relays.  The
graph is rebuilt from a fresh load snapshot each superframe; only the
next hop is ever committed, never a pinned end-to-end path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Sequence

from .geometry import NodeLayout


@dataclass(frozen=True)
class LoadTable:
    """Snapshot of per-node queued traffic plus network-wide averages.

    `load_per_node[j]` is the number of bits queued at node j awaiting
    transmission (relayed payloads included), sampled at the start of the
    request period.  `avg_load` and `avg_distance` are the networkwide
    means used to normalize the two weight terms.
    """

    load_per_node: tuple[float, ...]
    avg_load: float
    avg_distance: float

    @classmethod
    def from_loads(cls, loads: Sequence[float], layout: NodeLayout) -> "LoadTable":
        loads = tuple(float(v) for v in loads)
        if len(loads) != layout.n:
            raise ValueError("load vector length must match layout size")
        return cls(
            load_per_node=loads,
            avg_load=sum(loads) / len(loads),
            avg_distance=layout.mean_pair_distance,
        )


@dataclass(frozen=True)
class WeightedGraph:
    """Directed link weights indexed [src][dst]; the diagonal is unused."""

    weights: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.weights)


def link_weight(
    dist: float, avg_distance: float, dest_load: float, avg_load: float
) -> float:
    """Weight of one directed link: dist^2/D^2 + dest_load/F.

    The load term is defined as 0 when the network carries no load at all
    (cold start), leaving a purely geometric metric.
    """
    if avg_distance <= 0:
        raise ValueError("avg_distance must be positive")
    w = (dist * dist) / (avg_distance * avg_distance)
    if avg_load > 0:
        w += dest_load / avg_load
    return w


def build_graph(layout: NodeLayout, loads: LoadTable) -> WeightedGraph:
    """Compute the full directed weight matrix for the current loads."""
    if len(loads.load_per_node) != layout.n:
        raise ValueError("load table does not match layout size")
    dm = layout.distance_matrix
    d_avg = loads.avg_distance
    f_avg = loads.avg_load
    rows = []
    for i in range(layout.n):
        row = [
            0.0
            if i == j
            else link_weight(dm[i][j], d_avg, loads.load_per_node[j], f_avg)
            for j in range(layout.n)
        ]
        rows.append(tuple(row))
    return WeightedGraph(tuple(rows))


def next_hops_toward(graph: WeightedGraph, dst: int) -> list[int | None]:
    """First hop on a minimum-weight path to `dst` from every node.

    Runs one Dijkstra pass from `dst` over reversed edges, so a single
    call serves every requester routing toward the same destination.
    Equal-cost ties are broken toward the smallest next-hop node id,
    making the choice deterministic.  Entry `dst` itself is None.
    """
    n = graph.n
    if not 0 <= dst < n:
        raise ValueError(f"dst {dst} not in graph of {n} nodes")
    w = graph.weights
    cost = [math.inf] * n
    nxt: list[int | None] = [None] * n
    cost[dst] = 0.0
    done = [False] * n
    heap: list[tuple[float, int]] = [(0.0, dst)]
    while heap:
        c_u, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in range(n):
            if v == u:
                continue
            # Forward edge v -> u relaxed in reverse: going v -> u first is
            # optimal when cost-through-u beats v's current estimate.
            cand = c_u + w[v][u]
            if cand < cost[v]:
                cost[v] = cand
                nxt[v] = u
                heappush(heap, (cand, v))
            elif cand == cost[v] and nxt[v] is not None and u < nxt[v]:
                nxt[v] = u
    return nxt


def path_cost(graph: WeightedGraph, src: int, dst: int) -> float:
    """Total weight of a minimum-weight path src -> dst (inf if none)."""
    if src == dst:
        return 0.0
    n = graph.n
    w = graph.weights
    cost = [math.inf] * n
    cost[dst] = 0.0
    done = [False] * n
    heap: list[tuple[float, int]] = [(0.0, dst)]
    while heap:
        c_u, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == src:
            break
        for v in range(n):
            if v != u and c_u + w[v][u] < cost[v]:
                cost[v] = c_u + w[v][u]
                heappush(heap, (cost[v], v))
    return cost[src]


def next_hop(graph: WeightedGraph, src: int, dst: int) -> int:
    """First hop on a minimum-weight path from `src` to `dst`.

    May be `dst` itself when the direct link is optimal.

    Raises:
        ValueError: if src == dst, or no path exists.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    if not 0 <= src < graph.n:
        raise ValueError(f"src {src} not in graph of {graph.n} nodes")
    hop = next_hops_toward(graph, dst)[src]
    if hop is None:
        raise ValueError(f"no path from {src} to {dst}")
    return hop
