"""Relay-set selection so every 2-hop neighbor pair has a bridging relay.

A pair (u, w) with w exactly two hops from u is *covered* by relay r when r
is a direct neighbor of both u and w. The selection scan visits candidates
in a fixed order and keeps a candidate iff it bridges at least one pair that
no earlier relay covered; because every 2-hop pair has a middle node by
definition, the scan always terminates with full coverage.

`brute_force_min_relays` is an independent exact oracle (subset enumeration
in increasing size) used to validate the scan on small instances, and
`coverage_check` re-derives coverage from the raw adjacency so it shares no
code path with the selection itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import SizeLimitError, StaleAssignmentError
from .topology import Topology, two_hop

ORDER_ASCENDING = "ascending"
ORDER_DESCENDING = "descending"
ORDER_DEGREE = "degree"

BRUTE_FORCE_MAX_NODES = 12


@dataclass(frozen=True)
class RelayAssignment:
    """Result of a selection scan over one topology epoch.

    relays: selected node ids in selection order.
    selectors: for each relay r, every node u for which r bridges at least
        one of u's 2-hop pairs; a relay forwards traffic heard directly from
        one of these nodes.
    covered_pairs: all unordered 2-hop pairs, each listed as (min, max).
    bridge_tests: number of candidate/pair bridge tests the scan performed
        (workload witness for the quadratic loop structure).
    """

    relays: tuple[int, ...]
    selectors: dict[int, frozenset[int]]
    covered_pairs: frozenset[tuple[int, int]]
    epoch: int
    bridge_tests: int

    @property
    def relay_set(self) -> frozenset[int]:
        return frozenset(self.relays)


@dataclass(frozen=True)
class CardinalityReport:
    card_R: int
    card_V: int
    cond1: bool  # |R| < |V|
    cond2: bool  # |R| < |V - R|


def two_hop_pairs(t: Topology) -> frozenset[tuple[int, int]]:
    """All unordered (u, w) pairs with w exactly two hops from u."""
    pairs: set[tuple[int, int]] = set()
    for u in t.node_ids():
        for w in two_hop(t, u):
            pairs.add((u, w) if u < w else (w, u))
    return frozenset(pairs)


def _candidate_order(t: Topology, order: str) -> list[int]:
    ids = t.node_ids()
    if order == ORDER_ASCENDING:
        return ids
    if order == ORDER_DESCENDING:
        return ids[::-1]
    if order == ORDER_DEGREE:
        return sorted(ids, key=lambda u: (-len(t.adjacency[u]), u))
    raise ValueError(f"unknown candidate order: {order!r}")


def select_relays(t: Topology, order: str = ORDER_ASCENDING) -> RelayAssignment:
    """Select a relay set covering every 2-hop pair of the topology.

    Candidates are scanned once in the requested order; a candidate joins the
    relay set iff it bridges a still-uncovered pair, and then all pairs it
    bridges are marked covered. Identical topologies always yield identical
    assignments.
    """
    all_pairs = two_hop_pairs(t)
    uncovered = set(all_pairs)
    relays: list[int] = []
    tests = 0

    for v in _candidate_order(t, order):
        if not uncovered:
            break
        neighbors = sorted(t.adjacency[v])
        bridged: list[tuple[int, int]] = []
        hits_uncovered = False
        for u, w in combinations(neighbors, 2):
            if w in t.adjacency[u]:
                continue  # adjacent: not a 2-hop pair
            # u, w non-adjacent neighbors of v, so (u, w) is a 2-hop pair
            # bridged by v.
            pair = (u, w)
            tests += 1
            bridged.append(pair)
            if pair in uncovered:
                hits_uncovered = True
        if hits_uncovered:
            relays.append(v)
            uncovered.difference_update(bridged)

    selectors = {
        r: frozenset(
            u
            for u in t.adjacency[r]
            if any(w in t.adjacency[r] for w in two_hop(t, u))
        )
        for r in relays
    }
    return RelayAssignment(
        relays=tuple(relays),
        selectors=selectors,
        covered_pairs=all_pairs,
        epoch=t.epoch,
        bridge_tests=tests,
    )


def coverage_check(t: Topology, relays) -> list[tuple[int, int]]:
    """Return every 2-hop pair no relay bridges; empty means a valid cover.

    Deliberately re-enumerates pairs straight from the adjacency, independent
    of how the relay set was produced.
    """
    relay_ids = sorted(set(relays))
    missing: list[tuple[int, int]] = []
    for u, w in sorted(two_hop_pairs(t)):
        if not any(r in t.adjacency[u] and r in t.adjacency[w] for r in relay_ids):
            missing.append((u, w))
    return missing


def brute_force_min_relays(t: Topology, max_n: int = BRUTE_FORCE_MAX_NODES) -> set[int]:
    """Exact minimum relay cover by subset enumeration; small instances only.

    Subsets are tried in increasing size, lexicographically within a size, so
    the answer is the lexicographically-first minimum cover. Only nodes that
    bridge at least one pair are worth enumerating; any valid minimum cover
    consists solely of such nodes.
    """
    ids = t.node_ids()
    if len(ids) > max_n:
        raise SizeLimitError(f"{len(ids)} nodes exceeds the exact-solver cap {max_n}")

    pairs = sorted(two_hop_pairs(t))
    if not pairs:
        return set()

    candidates = [
        v
        for v in ids
        if any(u in t.adjacency[v] and w in t.adjacency[v] for u, w in pairs)
    ]
    for size in range(len(candidates) + 1):
        for subset in combinations(candidates, size):
            if not coverage_check(t, subset):
                return set(subset)
    raise AssertionError("every 2-hop pair has a middle node; cover must exist")


def cardinality_report(t: Topology, a: RelayAssignment) -> CardinalityReport:
    """Report the two size conditions |R| < |V| and |R| < |V - R|.

    Both are observations, never enforced: long paths, for instance, make
    nearly every interior node a relay and falsify the second condition.
    """
    if a.epoch != t.epoch:
        raise StaleAssignmentError(
            f"assignment epoch {a.epoch} != topology epoch {t.epoch}"
        )
    card_r = len(a.relays)
    card_v = len(t.nodes)
    return CardinalityReport(
        card_R=card_r,
        card_V=card_v,
        cond1=card_r < card_v,
        cond2=card_r < card_v - card_r,
    )


def dump_relays(a: RelayAssignment) -> str:
    """Plain-text export: one `relay <id> selectors <id list>` line per relay."""
    lines = []
    for r in sorted(a.relays):
        served = " ".join(str(u) for u in sorted(a.selectors.get(r, ())))
        lines.append(f"relay {r} selectors {served}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")
