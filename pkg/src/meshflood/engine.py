"""Deterministic discrete-event loop driving floods over a mesh topology.

Time is kept in integer microseconds so replaying a configuration is exact:
equal-time events are totally ordered by (kind rank, subject id, insertion
counter). Kind ranks put topology changes before relay recomputation before
cache work before traffic at the same instant:

    TOPO_RECONFIGURE < TOPO_CONTROL < CACHE_EXPIRY < EMIT_FROM_SOURCE
        < RELAY_EMIT < RECEIVE < METRICS_TICK

The source emits on its interval for the configured duration; after the last
scheduled second the loop keeps draining in-flight receptions and held
retransmissions so every flood completes. Receptions are delivered to the
neighbors the emitter had at transmission time; the `inflight=drop` flag
instead re-checks adjacency on arrival and counts newly unreachable copies
as lost in transit. Either way the bit-conservation identity is exact.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from enum import IntEnum

from . import metrics as mx
from .errors import AccountingError, ConfigError
from .fixtures import build_scenario_topology
from .metrics import MetricsSeries
from .protocol import (
    Action,
    NodeProtocolState,
    Packet,
    blind_flood_on_receive,
    expire_caches,
    on_receive,
    release_hold,
)
from .relays import RelayAssignment, cardinality_report, select_relays
from .topology import (
    MobilityStep,
    Topology,
    is_connected,
    reachable_from,
    reconfigure,
)

US = 1_000_000

MODE_RELAY = "relay"
MODE_BLIND = "blind"
INFLIGHT_DELIVER = "deliver"
INFLIGHT_DROP = "drop"
PLACEMENT_GRID = "grid"
PLACEMENT_UNIFORM = "uniform"
RELAY_ORDERS = ("ascending", "descending", "degree")


class EventKind(IntEnum):
    """Event kinds; the numeric value is the same-instant processing rank."""

    TOPO_RECONFIGURE = 0
    TOPO_CONTROL = 1
    CACHE_EXPIRY = 2
    EMIT_FROM_SOURCE = 3
    RELAY_EMIT = 4
    RECEIVE = 5
    METRICS_TICK = 6


@dataclass(frozen=True)
class Event:
    time_us: int
    kind: EventKind
    subject: int
    data: tuple = ()


class EventQueue:
    """Priority queue over (time, kind rank, subject, insertion counter)."""

    def __init__(self):
        self._heap: list[tuple[int, int, int, int, Event]] = []
        self._counter = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, event: Event) -> None:
        key = (event.time_us, int(event.kind), event.subject, self._counter)
        heapq.heappush(self._heap, key + (event,))
        self._counter += 1

    def pop(self) -> Event | None:
        if not self._heap:
            return None
        return heapq.heappop(self._heap)[4]


def schedule(queue: EventQueue, event: Event) -> None:
    queue.push(event)


def next_event(queue: EventQueue) -> Event | None:
    """Pop the globally next event; None signals end of simulation."""
    return queue.pop()


@dataclass(frozen=True)
class SimConfig:
    """Complete scenario description; `run` is a pure function of this."""

    node_count: int = 25
    placement: str = PLACEMENT_GRID
    area_side: float = 500.0
    radio_range: float = 120.0
    channel_bps: int = 11_000_000
    tx_power_mw: float = 5.0  # recorded in output metadata only
    payload_bits: int = 2000
    header_bits_per_relay: int = 200
    packet_interval_s: float = 2.0
    topo_control_interval_s: float = 5.0
    hold_time_s: float = 6.0
    topo_stability_s: float = 15.0
    duplicate_ttl_s: float = 30.0
    sim_duration_s: float = 300.0
    mode: str = MODE_RELAY
    rule2: bool = True
    inflight: str = INFLIGHT_DELIVER
    mobility_displacement: float = 0.0
    seed: int = 0
    repeat_seq: bool = False
    relay_order: str = "ascending"
    rate_schedule: tuple[tuple[float, int], ...] = ()
    fixture: str | None = None

    def validate(self) -> None:
        if self.node_count < 1:
            raise ConfigError("node_count must be at least 1")
        if self.placement not in (PLACEMENT_GRID, PLACEMENT_UNIFORM):
            raise ConfigError(f"unknown placement {self.placement!r}")
        if self.area_side <= 0 or self.radio_range <= 0:
            raise ConfigError("area_side and radio_range must be positive")
        if self.channel_bps < 1:
            raise ConfigError("channel_bps must be positive")
        if self.payload_bits < 1 or self.header_bits_per_relay < 0:
            raise ConfigError("invalid packet sizing")
        for name in (
            "packet_interval_s",
            "topo_control_interval_s",
            "hold_time_s",
            "topo_stability_s",
            "duplicate_ttl_s",
            "sim_duration_s",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.sim_duration_s < self.packet_interval_s:
            raise ConfigError("sim_duration_s must be at least packet_interval_s")
        if self.mode not in (MODE_RELAY, MODE_BLIND):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.inflight not in (INFLIGHT_DELIVER, INFLIGHT_DROP):
            raise ConfigError(f"unknown inflight policy {self.inflight!r}")
        if self.mobility_displacement < 0:
            raise ConfigError("mobility_displacement must be non-negative")
        if self.relay_order not in RELAY_ORDERS:
            raise ConfigError(f"unknown relay_order {self.relay_order!r}")
        for t, bits in self.rate_schedule:
            if t < 0 or bits < 1:
                raise ConfigError(f"bad rate_schedule entry ({t}, {bits})")


def _us(seconds: float) -> int:
    return round(seconds * US)


def serialization_delay_us(wire_size_bits: int, channel_bps: int) -> int:
    """Time to put a packet on the wire, floored to whole microseconds."""
    return wire_size_bits * US // channel_bps


def transmit(
    t: Topology, emitter: int, pkt: Packet, now_us: int, channel_bps: int
) -> tuple[int, tuple[int, ...]]:
    """Broadcast one copy: every current neighbor receives it after the
    serialization delay. Returns (arrival time, receivers in id order)."""
    delay = serialization_delay_us(pkt.wire_size_bits, channel_bps)
    return now_us + delay, tuple(sorted(t.adjacency[emitter]))


def _rate_schedule_payload(cfg: SimConfig, now_us: int) -> int:
    payload = cfg.payload_bits
    for t, bits in sorted(cfg.rate_schedule):
        if _us(t) <= now_us:
            payload = bits
        else:
            break
    return payload


def scenario_fingerprint(cfg: SimConfig, topo: Topology) -> str:
    """Identity of a scenario minus its flood mode, for paired comparisons."""
    label = cfg.fixture if cfg.fixture else cfg.placement
    schedule_part = ",".join(f"{t}:{b}" for t, b in sorted(cfg.rate_schedule))
    return (
        f"{label}|n={len(topo.nodes)}|range={topo.radio_range!r}"
        f"|seed={cfg.seed}|dur={cfg.sim_duration_s!r}"
        f"|int={cfg.packet_interval_s!r}|payload={cfg.payload_bits}"
        f"|mob={cfg.mobility_displacement!r}|sched={schedule_part}"
    )


class _Run:
    """Mutable state for one simulation execution."""

    def __init__(self, cfg: SimConfig, topo: Topology):
        self.cfg = cfg
        self.topo = topo
        self.initial_topo = topo
        self.source = topo.source_id
        self.queue = EventQueue()
        self.mobility_rng = random.Random(f"{cfg.seed}:mobility")
        self.assignment: RelayAssignment = select_relays(topo, cfg.relay_order)
        self.initial_assignment = self.assignment
        self.relay_recomputes = 1
        self.states = {
            u: NodeProtocolState(
                node_id=u,
                is_relay=u in self.assignment.relay_set,
                duplicate_ttl_us=_us(cfg.duplicate_ttl_s),
                hold_time_us=_us(cfg.hold_time_s),
            )
            for u in topo.node_ids()
        }
        self.area_side = max(
            cfg.area_side,
            max((max(n.pos[0], n.pos[1]) for n in topo.nodes.values()), default=0.0),
        )

        # Drain allowance: one relay chain is at most one hop per node, each
        # hop costing hold time plus serialization. Cache expiry can re-arm
        # relays while copies still circulate (slow links, mobility), so held
        # retransmissions due past the cutoff are truncated instead of
        # emitted; a truncated packet never goes on the wire, which keeps the
        # conservation identity exact.
        wire_max = max(
            [cfg.payload_bits, *(bits for _, bits in cfg.rate_schedule)]
        ) + len(topo.nodes) * cfg.header_bits_per_relay
        ser_max = wire_max / cfg.channel_bps
        drain_s = (len(topo.nodes) + 2) * (cfg.hold_time_s + ser_max + 1.0) + 10.0
        self.cutoff_us = _us(cfg.sim_duration_s + drain_s)
        self.series = MetricsSeries(
            duration_s=cfg.sim_duration_s,
            horizon_s=cfg.sim_duration_s + drain_s + ser_max + 2.0,
        )

        self.seq = 0
        self.expected_bits = 0
        self.expected_packets = 0
        self.lost_bits = 0
        self.lost_packets = 0
        self.cache_evictions = 0
        self.relay_loop_violations = 0
        self.relays_truncated = 0
        self.delivered_keys: dict[int, set] = {u: set() for u in topo.node_ids()}
        self.relayed_keys: dict[int, set] = {u: set() for u in topo.node_ids()}
        self.last_time_us = 0

    # -- scheduling -----------------------------------------------------

    def preload(self) -> None:
        cfg = self.cfg
        duration = _us(cfg.sim_duration_s)
        interval = _us(cfg.packet_interval_s)
        emissions = -(-duration // interval)  # ceil: every interval within run
        for k in range(emissions):
            self.queue.push(
                Event(k * interval, EventKind.EMIT_FROM_SOURCE, self.source)
            )
        control = _us(cfg.topo_control_interval_s)
        t = control
        while t < duration:
            self.queue.push(Event(t, EventKind.TOPO_CONTROL, -1))
            t += control
        if cfg.mobility_displacement > 0:
            stability = _us(cfg.topo_stability_s)
            t = stability
            while t < duration:
                self.queue.push(Event(t, EventKind.TOPO_RECONFIGURE, -1))
                t += stability
        t = US
        while t <= duration:
            self.queue.push(Event(t, EventKind.METRICS_TICK, -1))
            t += US

    # -- traffic helpers ------------------------------------------------

    def _record(self, now_us: int, node: int, counter: str, amount: int) -> None:
        self.series.record(now_us / US, node, counter, amount)

    def _broadcast(self, pkt: Packet, now_us: int) -> None:
        arrival, receivers = transmit(
            self.topo, pkt.emitter, pkt, now_us, self.cfg.channel_bps
        )
        wire = pkt.wire_size_bits
        self.expected_bits += wire * len(receivers)
        self.expected_packets += len(receivers)
        if receivers:
            self.queue.push(
                Event(
                    arrival,
                    EventKind.RECEIVE,
                    pkt.emitter,
                    data=(pkt, receivers, self.topo),
                )
            )

    def _note_seen(self, node: int, key, before: int | None, now_us: int) -> None:
        # A fresh (or refreshed) cache entry gets its own expiry event just
        # past the TTL boundary; entries aged exactly the TTL are retained.
        after = self.states[node].seen.get(key)
        if after == now_us and after != before:
            self.queue.push(
                Event(
                    now_us + self.states[node].duplicate_ttl_us + 1,
                    EventKind.CACHE_EXPIRY,
                    node,
                )
            )

    def _emit_from_relay(self, node: int, out: Packet, now_us: int) -> None:
        if now_us >= self.cutoff_us:
            self.relays_truncated += 1
            return
        if out.key in self.relayed_keys[node]:
            self.relay_loop_violations += 1
        self.relayed_keys[node].add(out.key)
        self._record(now_us, node, mx.BITS_RELAYED, out.wire_size_bits)
        self._record(now_us, node, mx.PACKETS_RELAYED, 1)
        self._broadcast(out, now_us)

    # -- event handlers ---------------------------------------------------

    def handle_emit_from_source(self, ev: Event) -> None:
        cfg = self.cfg
        seq = 0 if cfg.repeat_seq else self.seq
        self.seq += 1
        pkt = Packet(
            origin=self.source,
            seq=seq,
            payload_bits=_rate_schedule_payload(cfg, ev.time_us),
            header_bits=0,
            emitter=self.source,
            created_at_us=ev.time_us,
        )
        state = self.states[self.source]
        before = state.seen.get(pkt.key)
        if before is None:
            state.seen[pkt.key] = ev.time_us
        self._note_seen(self.source, pkt.key, before, ev.time_us)
        self._record(ev.time_us, self.source, mx.BITS_SENT, pkt.wire_size_bits)
        self._record(ev.time_us, self.source, mx.PACKETS_SENT, 1)
        self._broadcast(pkt, ev.time_us)

    def handle_receive(self, ev: Event) -> None:
        pkt, receivers, emit_topo = ev.data
        cfg = self.cfg
        wire = pkt.wire_size_bits
        drop_stale = (
            cfg.inflight == INFLIGHT_DROP and emit_topo.epoch != self.topo.epoch
        )
        for v in receivers:
            if drop_stale and pkt.emitter not in self.topo.adjacency[v]:
                self.lost_bits += wire
                self.lost_packets += 1
                self._record(ev.time_us, v, mx.BITS_LOST, wire)
                self._record(ev.time_us, v, mx.PACKETS_LOST, 1)
                continue
            state = self.states[v]
            neighbors = emit_topo.adjacency[v]
            before = state.seen.get(pkt.key)
            if cfg.mode == MODE_BLIND:
                action = blind_flood_on_receive(state, pkt, neighbors, ev.time_us)
            else:
                action = on_receive(
                    state, pkt, self.assignment, neighbors, ev.time_us, cfg.rule2
                )
            self._note_seen(v, pkt.key, before, ev.time_us)
            if action is Action.DROP_DUPLICATE:
                self._record(ev.time_us, v, mx.BITS_RECEIVED_DUP, wire)
                self._record(ev.time_us, v, mx.PACKETS_RECEIVED_DUP, 1)
                continue
            self._record(ev.time_us, v, mx.BITS_RECEIVED_FIRST, wire)
            self._record(ev.time_us, v, mx.PACKETS_RECEIVED_FIRST, 1)
            self.delivered_keys[v].add(pkt.key)
            if action is Action.DELIVER_AND_RELAY:
                self.queue.push(
                    Event(
                        ev.time_us + state.hold_time_us,
                        EventKind.RELAY_EMIT,
                        v,
                        data=(pkt.key,),
                    )
                )

    def handle_relay_emit(self, ev: Event) -> None:
        (key,) = ev.data
        out = release_hold(self.states[ev.subject], key, self.cfg.header_bits_per_relay)
        if out is not None:
            self._emit_from_relay(ev.subject, out, ev.time_us)

    def handle_cache_expiry(self, ev: Event) -> None:
        eviction = expire_caches(
            self.states[ev.subject], ev.time_us, self.cfg.header_bits_per_relay
        )
        self.cache_evictions += len(eviction.seen_keys)
        for out in eviction.flushed:
            self._emit_from_relay(ev.subject, out, ev.time_us)

    def handle_topo_control(self, _ev: Event) -> None:
        if self.assignment.epoch != self.topo.epoch:
            self.assignment = select_relays(self.topo, self.cfg.relay_order)
            self.relay_recomputes += 1
            for u, state in self.states.items():
                state.is_relay = u in self.assignment.relay_set

    def handle_topo_reconfigure(self, _ev: Event) -> None:
        step = MobilityStep(self.cfg.mobility_displacement, self.area_side)
        self.topo = reconfigure(self.topo, step, self.mobility_rng.getrandbits(64))

    # -- main loop --------------------------------------------------------

    def execute(self) -> MetricsSeries:
        self.preload()
        handlers = {
            EventKind.EMIT_FROM_SOURCE: self.handle_emit_from_source,
            EventKind.RECEIVE: self.handle_receive,
            EventKind.RELAY_EMIT: self.handle_relay_emit,
            EventKind.CACHE_EXPIRY: self.handle_cache_expiry,
            EventKind.TOPO_CONTROL: self.handle_topo_control,
            EventKind.TOPO_RECONFIGURE: self.handle_topo_reconfigure,
            EventKind.METRICS_TICK: lambda ev: None,
        }
        while True:
            ev = next_event(self.queue)
            if ev is None:
                break
            if ev.time_us < self.last_time_us:
                raise AccountingError("event time went backwards")
            self.last_time_us = ev.time_us
            handlers[ev.kind](ev)
        self._finalize()
        return self.series

    def _finalize(self) -> None:
        series = self.series
        got_bits = (
            series.counter_total(mx.BITS_RECEIVED_FIRST)
            + series.counter_total(mx.BITS_RECEIVED_DUP)
            + self.lost_bits
        )
        if got_bits != self.expected_bits:
            raise AccountingError(
                f"bit conservation broken: sent {self.expected_bits}, "
                f"accounted {got_bits}"
            )
        got_packets = (
            series.counter_total(mx.PACKETS_RECEIVED_FIRST)
            + series.counter_total(mx.PACKETS_RECEIVED_DUP)
            + self.lost_packets
        )
        if got_packets != self.expected_packets:
            raise AccountingError("packet conservation broken")

        # Coverage over all non-source nodes, so a disconnected start shows
        # up as a fraction below one; `reachable_nodes` reports how many of
        # them the t=0 topology could reach at all.
        others = set(self.initial_topo.node_ids()) - {self.source}
        reachable = reachable_from(self.initial_topo, self.source) - {self.source}
        delivering = [u for u in sorted(others) if self.delivered_keys[u]]
        coverage = len(delivering) / len(others) if others else 1.0
        distinct = [len(self.delivered_keys[u]) for u in sorted(reachable)]

        card = cardinality_report(self.initial_topo, self.initial_assignment)
        cfg = self.cfg
        series.meta.update(
            {
                "fingerprint": scenario_fingerprint(cfg, self.initial_topo),
                "warning_disconnected": not is_connected(self.initial_topo),
                "coverage_fraction": coverage,
                "reachable_nodes": len(reachable),
                "delivering_nodes": len(delivering),
                "min_distinct_delivered": min(distinct, default=0),
                "max_distinct_delivered": max(distinct, default=0),
                "source_emissions": series.counter_total(mx.PACKETS_SENT),
                "relay_set_size": len(self.initial_assignment.relays),
                "cardinality_card_R": card.card_R,
                "cardinality_card_V": card.card_V,
                "cardinality_cond1": card.cond1,
                "cardinality_cond2": card.cond2,
                "relay_recomputes": self.relay_recomputes,
                "relay_loop_violations": self.relay_loop_violations,
                "relays_truncated": self.relays_truncated,
                "cache_evictions": self.cache_evictions,
                "conservation_sent_bits": self.expected_bits,
                "conservation_received_bits": got_bits - self.lost_bits,
                "channel_overloaded": series.peak_node_bits_per_second()
                > cfg.channel_bps,
                "config_mode": cfg.mode,
                "config_seed": cfg.seed,
                "config_node_count": len(self.initial_topo.nodes),
                "config_placement": cfg.placement,
                "config_fixture": cfg.fixture or "",
                "config_area_side": cfg.area_side,
                "config_radio_range": self.initial_topo.radio_range,
                "config_channel_bps": cfg.channel_bps,
                "config_tx_power_mw": cfg.tx_power_mw,
                "config_payload_bits": cfg.payload_bits,
                "config_header_bits_per_relay": cfg.header_bits_per_relay,
                "config_packet_interval_s": cfg.packet_interval_s,
                "config_topo_control_interval_s": cfg.topo_control_interval_s,
                "config_hold_time_s": cfg.hold_time_s,
                "config_topo_stability_s": cfg.topo_stability_s,
                "config_duplicate_ttl_s": cfg.duplicate_ttl_s,
                "config_sim_duration_s": cfg.sim_duration_s,
                "config_rule2": cfg.rule2,
                "config_inflight": cfg.inflight,
                "config_mobility_displacement": cfg.mobility_displacement,
                "config_repeat_seq": cfg.repeat_seq,
                "config_relay_order": cfg.relay_order,
                "config_rate_schedule": ",".join(
                    f"{t}:{b}" for t, b in sorted(cfg.rate_schedule)
                ),
            }
        )


def run(cfg: SimConfig, topology: Topology | None = None) -> MetricsSeries:
    """Execute one scenario and return its complete metrics series.

    The same configuration (including seed) always produces a bit-identical
    series. An explicitly supplied topology overrides placement settings.
    """
    cfg.validate()
    if topology is None:
        topology = build_scenario_topology(
            fixture=cfg.fixture,
            node_count=cfg.node_count,
            placement=cfg.placement,
            area_side=cfg.area_side,
            radio_range=cfg.radio_range,
            seed=cfg.seed,
        )
    return _Run(cfg, topology).execute()
