"""Per-node forwarding state machine for optimized and blind flooding.

Two rules govern a relay's retransmission decision:

  1. first reception only — a (origin, seq) already in the duplicate cache
     is dropped outright, never delivered or forwarded again;
  2. eligible emitter — the copy must have arrived directly from a node the
     relay serves (one of its selectors) or from the packet's origin when
     the origin is a direct neighbor.

A forwarded packet sits in the hold buffer for the configured hold time and
leaves with its header grown by one relay-header increment and the emitter
rewritten to the forwarding node. Blind flooding shares the duplicate cache
but retransmits every first-seen packet at every node.

All time arguments are integer microseconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import ProtocolViolationError
from .relays import RelayAssignment

DEFAULT_PAYLOAD_BITS = 2000
DEFAULT_HEADER_BITS_PER_RELAY = 200
DEFAULT_HOLD_TIME_US = 6_000_000
DEFAULT_DUPLICATE_TTL_US = 30_000_000


class Action(Enum):
    DELIVER_AND_RELAY = "deliver_and_relay"
    DELIVER_ONLY = "deliver_only"
    DROP_DUPLICATE = "drop_duplicate"


@dataclass(frozen=True)
class Packet:
    """One flood message copy as it exists on the wire."""

    origin: int
    seq: int
    payload_bits: int = DEFAULT_PAYLOAD_BITS
    header_bits: int = 0
    emitter: int = -1
    created_at_us: int = 0

    @property
    def wire_size_bits(self) -> int:
        return self.payload_bits + self.header_bits

    @property
    def key(self) -> tuple[int, int]:
        return (self.origin, self.seq)


@dataclass
class NodeProtocolState:
    """Mutable per-node forwarding state, owned by the engine's event loop."""

    node_id: int
    is_relay: bool = False
    duplicate_ttl_us: int = DEFAULT_DUPLICATE_TTL_US
    hold_time_us: int = DEFAULT_HOLD_TIME_US
    seen: dict[tuple[int, int], int] = field(default_factory=dict)
    hold_buffer: dict[tuple[int, int], tuple[Packet, int]] = field(default_factory=dict)


@dataclass(frozen=True)
class Eviction:
    """What expire_caches removed: aged cache keys and force-flushed packets."""

    seen_keys: tuple[tuple[int, int], ...]
    flushed: tuple[Packet, ...]


def emitter_eligible(
    state: NodeProtocolState,
    pkt: Packet,
    relays: RelayAssignment,
    neighbors: frozenset[int],
) -> bool:
    """True iff this relay may forward a copy heard from pkt.emitter.

    Eligible emitters are the relay's selectors plus the packet origin when
    the origin is a direct neighbor (a relay always forwards traffic heard
    straight from its source).
    """
    if pkt.emitter in relays.selectors.get(state.node_id, frozenset()):
        return True
    return pkt.emitter == pkt.origin and pkt.origin in neighbors


def _fresh(state: NodeProtocolState, key: tuple[int, int], now_us: int) -> bool:
    first_seen = state.seen.get(key)
    return first_seen is None or now_us - first_seen > state.duplicate_ttl_us


def on_receive(
    state: NodeProtocolState,
    pkt: Packet,
    relays: RelayAssignment,
    neighbors: frozenset[int],
    now_us: int,
    rule2: bool = True,
) -> Action:
    """Process one reception at a node under the optimized-flood rules.

    `neighbors` is the receiving node's one-hop set at transmission time; a
    packet from outside it is a simulation bug. With rule2 disabled, any
    relay forwards every first-seen packet (emitter identity ignored).
    """
    if pkt.emitter not in neighbors:
        raise ProtocolViolationError(
            f"node {state.node_id} heard non-neighbor {pkt.emitter}"
        )
    if not _fresh(state, pkt.key, now_us):
        return Action.DROP_DUPLICATE
    state.seen[pkt.key] = now_us
    if state.is_relay and (
        not rule2 or emitter_eligible(state, pkt, relays, neighbors)
    ):
        state.hold_buffer[pkt.key] = (pkt, now_us)
        return Action.DELIVER_AND_RELAY
    return Action.DELIVER_ONLY


def blind_flood_on_receive(
    state: NodeProtocolState,
    pkt: Packet,
    neighbors: frozenset[int],
    now_us: int,
) -> Action:
    """Classic flooding: every node retransmits each first-seen packet once."""
    if pkt.emitter not in neighbors:
        raise ProtocolViolationError(
            f"node {state.node_id} heard non-neighbor {pkt.emitter}"
        )
    if not _fresh(state, pkt.key, now_us):
        return Action.DROP_DUPLICATE
    state.seen[pkt.key] = now_us
    state.hold_buffer[pkt.key] = (pkt, now_us)
    return Action.DELIVER_AND_RELAY


def release_hold(
    state: NodeProtocolState,
    key: tuple[int, int],
    header_increment: int = DEFAULT_HEADER_BITS_PER_RELAY,
) -> Packet | None:
    """Take a held packet out of the buffer, ready to go back on the wire.

    The outgoing copy carries one more relay-header increment and names this
    node as its emitter. Returns None when the key is no longer held.
    """
    entry = state.hold_buffer.pop(key, None)
    if entry is None:
        return None
    pkt, _ = entry
    return replace(
        pkt,
        header_bits=pkt.header_bits + header_increment,
        emitter=state.node_id,
    )


def expire_caches(
    state: NodeProtocolState,
    now_us: int,
    header_increment: int = DEFAULT_HEADER_BITS_PER_RELAY,
) -> Eviction:
    """Drop cache entries older than the TTL; force-flush overdue held packets.

    An entry aged exactly the TTL (or a hold aged exactly the hold time) is
    retained: the scheduled flush event at that instant handles it.
    """
    aged = [k for k, t0 in state.seen.items() if now_us - t0 > state.duplicate_ttl_us]
    for k in aged:
        del state.seen[k]

    overdue = [
        k for k, (_, t0) in state.hold_buffer.items()
        if now_us - t0 > state.hold_time_us
    ]
    flushed = []
    for k in overdue:
        out = release_hold(state, k, header_increment)
        if out is not None:
            flushed.append(out)
    return Eviction(seen_keys=tuple(aged), flushed=tuple(flushed))
