"""Node placement and eight-sector directional antenna geometry.

Nodes live in a rectangular room and every node carries eight 45-degree
sector antennas covering a disc of configurable radius.  All geometry here
is 2-D and static for the lifetime of a run.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable

import numpy as np

SECTOR_COUNT = 8
SECTOR_WIDTH_DEG = 360.0 / SECTOR_COUNT

# Default coverage radius: a 16x16 m room has a 22.63 m diagonal, so 23 m
# keeps any random layout fully connected.
DEFAULT_COVERAGE_RADIUS_M = 23.0

_MAX_PLACEMENT_ATTEMPTS = 100


@dataclass(frozen=True)
class Point:
    """A 2-D position in meters."""

    x: float
    y: float


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points in meters."""
    return math.hypot(b.x - a.x, b.y - a.y)


def sector_of(origin: Point, target: Point) -> int:
    """Sector index (0..7) of `target` as seen from `origin`.

    Sector k covers polar angles [k*45, (k+1)*45) degrees, measured
    counterclockwise from the +x axis.  Boundaries belong to the higher
    sector, so a target due north of the origin (90 degrees) is in
    sector 2.

    Raises:
        ValueError: if the points coincide (direction undefined).
    """
    dx = target.x - origin.x
    dy = target.y - origin.y
    if dx == 0.0 and dy == 0.0:
        raise ValueError("sector undefined for coincident points")
    angle = math.degrees(math.atan2(dy, dx)) % 360.0
    # Final modulo guards the rare float case where `% 360.0` returns 360.0.
    return int(angle // SECTOR_WIDTH_DEG) % SECTOR_COUNT


def in_beam(tx: Point, aim: Point, probe: Point, radius: float) -> bool:
    """True if `probe` is illuminated by the beam `tx` points at `aim`.

    The beam is an ideal 45-degree pie wedge of the given radius with no
    sidelobes: `probe` is hit iff it falls in the same sector as `aim`
    (as seen from `tx`) and lies within `radius` of `tx`.  A probe
    coincident with the transmitter is never considered illuminated.
    """
    if probe.x == tx.x and probe.y == tx.y:
        return False
    if distance(tx, probe) > radius:
        return False
    return sector_of(tx, probe) == sector_of(tx, aim)


@dataclass(frozen=True)
class NodeLayout:
    """Immutable node positions plus room and antenna-coverage geometry.

    Node ids are dense integers 0..N-1 indexing `positions`.  A layout is
    only valid if every pair of nodes is within `coverage_radius` of each
    other (single-hop reachability everywhere).
    """

    positions: tuple[Point, ...]
    room_width: float
    room_height: float
    coverage_radius: float = DEFAULT_COVERAGE_RADIUS_M

    def __post_init__(self) -> None:
        if len(self.positions) < 2:
            raise ValueError("a layout needs at least 2 nodes")
        if self.room_width <= 0 or self.room_height <= 0:
            raise ValueError("room dimensions must be positive")
        if self.coverage_radius <= 0:
            raise ValueError("coverage_radius must be positive")
        for i, p in enumerate(self.positions):
            if not (0.0 <= p.x <= self.room_width and 0.0 <= p.y <= self.room_height):
                raise ValueError(f"node {i} at ({p.x}, {p.y}) is outside the room")
        if not _fully_connected(self.positions, self.coverage_radius):
            raise ValueError(
                "layout is not fully connected: some node pair exceeds "
                f"coverage_radius={self.coverage_radius}"
            )

    @property
    def n(self) -> int:
        return len(self.positions)

    @cached_property
    def distance_matrix(self) -> tuple[tuple[float, ...], ...]:
        """Pairwise node distances, indexed [i][j]."""
        pts = self.positions
        return tuple(
            tuple(distance(a, b) for b in pts) for a in pts
        )

    @cached_property
    def sector_matrix(self) -> tuple[tuple[int, ...], ...]:
        """sector_of(i, j) for every ordered node pair; diagonal is -1."""
        pts = self.positions
        return tuple(
            tuple(-1 if i == j else sector_of(pts[i], pts[j]) for j in range(self.n))
            for i in range(self.n)
        )

    @cached_property
    def mean_pair_distance(self) -> float:
        """Mean distance over all unordered node pairs."""
        total = 0.0
        count = 0
        dm = self.distance_matrix
        for i in range(self.n):
            for j in range(i + 1, self.n):
                total += dm[i][j]
                count += 1
        return total / count


def _fully_connected(positions: Iterable[Point], radius: float) -> bool:
    pts = list(positions)
    return all(
        distance(pts[i], pts[j]) <= radius
        for i in range(len(pts))
        for j in range(i + 1, len(pts))
    )


def place_nodes(
    count: int,
    room_width: float,
    room_height: float,
    rng: np.random.Generator,
    coverage_radius: float = DEFAULT_COVERAGE_RADIUS_M,
) -> NodeLayout:
    """Draw `count` node positions uniformly at random over the room.

    The draw is a deterministic function of the generator state.  If the
    configured coverage radius is smaller than the room diagonal a draw can
    violate full connectivity; such layouts are redrawn up to 100 times
    before giving up.

    Args:
        count: number of nodes, at least 2.
        room_width: room extent along x, meters.
        room_height: room extent along y, meters.
        rng: seeded numpy generator.
        coverage_radius: antenna coverage radius in meters.

    Returns:
        A fully connected NodeLayout.
    """
    if count < 2:
        raise ValueError("count must be >= 2 (a piconet needs a source and a destination)")
    if room_width <= 0 or room_height <= 0:
        raise ValueError("room dimensions must be positive")
    for _ in range(_MAX_PLACEMENT_ATTEMPTS):
        xs = rng.uniform(0.0, room_width, size=count)
        ys = rng.uniform(0.0, room_height, size=count)
        pts = tuple(Point(float(x), float(y)) for x, y in zip(xs, ys))
        if _fully_connected(pts, coverage_radius):
            return NodeLayout(pts, room_width, room_height, coverage_radius)
    raise ValueError(
        f"no fully connected layout found in {_MAX_PLACEMENT_ATTEMPTS} draws; "
        "coverage_radius is too small for the room"
    )


def save_layout_csv(layout: NodeLayout, fp: IO[str]) -> None:
    """Write the layout as `node_id,x,y` rows with round-trip precision."""
    writer = csv.writer(fp)
    writer.writerow(["node_id", "x", "y"])
    for i, p in enumerate(layout.positions):
        writer.writerow([i, repr(p.x), repr(p.y)])


def load_layout_csv(
    fp: IO[str],
    room_width: float,
    room_height: float,
    coverage_radius: float = DEFAULT_COVERAGE_RADIUS_M,
) -> NodeLayout:
    """Read a layout written by `save_layout_csv`.

    Node ids must be dense and start at 0; room geometry is supplied by the
    caller because the CSV stores positions only.
    """
    reader = csv.reader(fp)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["node_id", "x", "y"]:
        raise ValueError("layout CSV must start with header 'node_id,x,y'")
    rows = [(int(r[0]), float(r[1]), float(r[2])) for r in reader if r]
    rows.sort(key=lambda r: r[0])
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValueError("layout CSV node ids must be dense integers starting at 0")
    pts = tuple(Point(x, y) for _, x, y in rows)
    return NodeLayout(pts, room_width, room_height, coverage_radius)
