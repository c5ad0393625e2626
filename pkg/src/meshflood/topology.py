"""Node placement, unit-disk connectivity and neighborhood queries.

Adjacency is purely geometric: two distinct nodes are linked iff their
Euclidean distance is at most the radio range. All operations are pure
functions of their inputs (plus an explicit seed where randomness is
involved), so identical calls always return identical results.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from .errors import EmptyScenarioError, UnknownNodeError

DEFAULT_AREA_SIDE = 500.0


class Role(Enum):
    SOURCE = "source"
    CLIENT = "client"


class Placement(Enum):
    GRID = "grid"
    UNIFORM_RANDOM = "uniform"


@dataclass(frozen=True)
class Node:
    """A radio node: id, source/client role and a position in meters."""

    id: int
    role: Role
    pos: tuple[float, float]


@dataclass(frozen=True)
class MobilityStep:
    """Bounded random displacement applied at each reconfiguration."""

    max_displacement: float
    area_side: float = DEFAULT_AREA_SIDE


@dataclass(frozen=True)
class Topology:
    """Immutable snapshot of node positions and disk adjacency."""

    nodes: dict[int, Node]
    radio_range: float
    adjacency: dict[int, frozenset[int]]
    epoch: int = 0

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    @property
    def source_id(self) -> int:
        for node in self.nodes.values():
            if node.role is Role.SOURCE:
                return node.id
        raise UnknownNodeError("topology has no source node")


def place_nodes(
    count: int,
    placement: Placement = Placement.GRID,
    area_side: float = DEFAULT_AREA_SIDE,
    seed: int = 0,
    source: int = 0,
) -> list[Node]:
    """Place `count` nodes in the square area; node `source` gets the source role.

    Grid mode fills a ceil(sqrt(count))-per-side lattice row-major (x varies
    fastest) anchored on the area corners, truncating the highest lattice
    indices. Uniform mode draws i.i.d. positions from random.Random(seed).
    """
    if count < 1:
        raise EmptyScenarioError(f"cannot place {count} nodes")
    if area_side <= 0:
        raise ValueError("area_side must be positive")

    positions: list[tuple[float, float]] = []
    if placement is Placement.GRID:
        side = math.ceil(math.sqrt(count))
        spacing = area_side / (side - 1) if side > 1 else 0.0
        for i in range(count):
            row, col = divmod(i, side)
            positions.append((col * spacing, row * spacing))
    else:
        rng = random.Random(seed)
        for _ in range(count):
            x = rng.uniform(0.0, area_side)
            y = rng.uniform(0.0, area_side)
            positions.append((x, y))

    return [
        Node(i, Role.SOURCE if i == source else Role.CLIENT, positions[i])
        for i in range(count)
    ]


def grid_spacing(count: int, area_side: float = DEFAULT_AREA_SIDE) -> float:
    """Lattice spacing used by grid placement for `count` nodes."""
    side = math.ceil(math.sqrt(count))
    return area_side / (side - 1) if side > 1 else 0.0


def _disk_adjacency(
    nodes: dict[int, Node], radio_range: float
) -> dict[int, frozenset[int]]:
    ids = sorted(nodes)
    links: dict[int, set[int]] = {i: set() for i in ids}
    for idx, u in enumerate(ids):
        for v in ids[idx + 1 :]:
            if math.dist(nodes[u].pos, nodes[v].pos) <= radio_range:
                links[u].add(v)
                links[v].add(u)
    return {i: frozenset(neigh) for i, neigh in links.items()}


def build_topology(nodes: list[Node], radio_range: float) -> Topology:
    """Build the unit-disk topology over `nodes`."""
    if radio_range <= 0:
        raise ValueError("radio_range must be positive")
    node_map = {n.id: n for n in nodes}
    if len(node_map) != len(nodes):
        raise ValueError("duplicate node ids")
    return Topology(node_map, radio_range, _disk_adjacency(node_map, radio_range))


def one_hop(t: Topology, u: int) -> frozenset[int]:
    """Direct neighbors of `u`."""
    try:
        return t.adjacency[u]
    except KeyError:
        raise UnknownNodeError(u) from None


def two_hop(t: Topology, u: int) -> frozenset[int]:
    """Nodes reachable in exactly two hops from `u` (never one, never zero)."""
    direct = one_hop(t, u)
    reached: set[int] = set()
    for mid in direct:
        reached.update(t.adjacency[mid])
    reached -= direct
    reached.discard(u)
    return frozenset(reached)


def is_connected(t: Topology) -> bool:
    """True iff every node is reachable from every other; trivially true for n <= 1."""
    ids = t.node_ids()
    if len(ids) <= 1:
        return True
    seen = {ids[0]}
    frontier = [ids[0]]
    while frontier:
        u = frontier.pop()
        for v in t.adjacency[u]:
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return len(seen) == len(ids)


def reachable_from(t: Topology, start: int) -> frozenset[int]:
    """All nodes reachable from `start`, including `start` itself."""
    if start not in t.nodes:
        raise UnknownNodeError(start)
    seen = {start}
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for v in t.adjacency[u]:
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return frozenset(seen)


def reconfigure(t: Topology, mobility: MobilityStep, seed: int) -> Topology:
    """Perturb every non-source node by a seeded displacement and rebuild links.

    Displacements are drawn in polar form (radius uniform in
    [0, max_displacement], angle uniform), so no node moves farther than the
    configured bound. Positions are clamped to [0, area_side]. The epoch is
    incremented even when max_displacement is zero.
    """
    rng = random.Random(seed)
    moved: dict[int, Node] = {}
    for u in sorted(t.nodes):
        node = t.nodes[u]
        if node.role is Role.SOURCE:
            moved[u] = node
            continue
        radius = rng.uniform(0.0, mobility.max_displacement)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        x = min(max(node.pos[0] + radius * math.cos(angle), 0.0), mobility.area_side)
        y = min(max(node.pos[1] + radius * math.sin(angle), 0.0), mobility.area_side)
        moved[u] = Node(node.id, node.role, (x, y))
    return Topology(
        moved, t.radio_range, _disk_adjacency(moved, t.radio_range), t.epoch + 1
    )


def save_topology(t: Topology, path) -> None:
    """Write the plain-text adjacency format: header, node lines, edge lines."""
    lines = [f"n {len(t.nodes)} range {t.radio_range!r}"]
    for u in t.node_ids():
        node = t.nodes[u]
        lines.append(f"node {u} {node.pos[0]!r} {node.pos[1]!r} {node.role.value}")
    for u in t.node_ids():
        for v in sorted(t.adjacency[u]):
            if u < v:
                lines.append(f"edge {u} {v}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_topology(path) -> Topology:
    """Read a topology file written by save_topology; edges are taken as given."""
    nodes: dict[int, Node] = {}
    links: dict[int, set[int]] = {}
    radio_range = 0.0
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            parts = raw.split()
            if not parts:
                continue
            if parts[0] == "n":
                radio_range = float(parts[3])
            elif parts[0] == "node":
                u = int(parts[1])
                role = Role.SOURCE if parts[4] == Role.SOURCE.value else Role.CLIENT
                nodes[u] = Node(u, role, (float(parts[2]), float(parts[3])))
                links[u] = set()
            elif parts[0] == "edge":
                u, v = int(parts[1]), int(parts[2])
                links[u].add(v)
                links[v].add(u)
            else:
                raise ValueError(f"unrecognized topology line: {raw.strip()}")
    return Topology(nodes, radio_range, {u: frozenset(s) for u, s in links.items()})
