"""Deterministic simulator of concurrent-transmission scheduling in a
60 GHz directional-antenna piconet, with a direct-transmission baseline.
"""

from .channel import ChannelParams, link_rate, received_power, slots_for_payload
from .geometry import NodeLayout, Point, distance, in_beam, place_nodes, sector_of
from .pathing import LoadTable, WeightedGraph, build_graph, link_weight, next_hop
from .scheduling import Group, Schedule, TReq, admit, build_schedule, conflicts, prioritize
from .simkernel import (
    Flow,
    RunSummary,
    Simulation,
    SuperframeStats,
    jain_index,
    run_simulation,
    spawn_flows,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "Flow",
    "Group",
    "LoadTable",
    "NodeLayout",
    "Point",
    "RunSummary",
    "Schedule",
    "Simulation",
    "SuperframeStats",
    "TReq",
    "WeightedGraph",
    "admit",
    "build_graph",
    "build_schedule",
    "conflicts",
    "distance",
    "in_beam",
    "jain_index",
    "link_rate",
    "link_weight",
    "next_hop",
    "place_nodes",
    "prioritize",
    "received_power",
    "run_simulation",
    "sector_of",
    "slots_for_payload",
    "spawn_flows",
]
