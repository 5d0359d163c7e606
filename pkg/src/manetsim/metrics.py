"""Trace collection and the six performance metrics.

Every send/forward/receive/drop and every energy charge becomes one
TraceEvent.  Metrics are computed by a streaming aggregator, so the same
code path serves the post-run report, hand-built traces in tests, and
full-length runs where keeping records in memory would be wasteful.

Actions: 's' send, 'f' forward, 'r' receive, 'd' drop, 'e' energy charge.
Layers: AGT (application), RTR (routing), MAC, IFQ (interface queue).
Drop reasons: IFQ, NRTE, TOUT, TTL, COLLISION, NODE_DEAD.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .sim_core import US_PER_S

CONTROL_KINDS = ("RREQ", "RREP", "RERR")
DROP_REASONS = ("IFQ", "NRTE", "TOUT", "TTL", "COLLISION", "NODE_DEAD")
# Reasons that end a data packet's life.  COLLISION losses of unicast data
# are retried by the MAC and surface as TOUT on retry exhaustion, so they
# are not terminal.
TERMINAL_REASONS = frozenset(("IFQ", "NRTE", "TOUT", "TTL", "NODE_DEAD"))


class TraceEvent(NamedTuple):
    time_us: int
    action: str
    layer: str
    node: int
    kind: Optional[str]      # DATA / RREQ / RREP / RERR, None for energy events
    uid: Optional[int]
    reason: Optional[str]    # drop reason, or tx/rx for energy events
    size: int
    energy: float


def format_event(ev: TraceEvent) -> str:
    return (
        f"{ev.time_us / US_PER_S:.6f} {ev.action} {ev.layer} {ev.node}"
        f" {ev.kind or '-'} {'-' if ev.uid is None else ev.uid}"
        f" {ev.reason or '-'} {ev.size} {ev.energy:.9f}"
    )


class MetricsAggregator:
    """Streaming consumer of TraceEvents; holds every counter the report needs."""

    def __init__(self):
        self.data_sent = 0
        self.data_received = 0
        self.routing_packets = 0           # control s/f at RTR (SRN numerator)
        self.drops = {r: 0 for r in DROP_REASONS}
        self.terminal_drops = 0
        self.send_time_us: dict[int, int] = {}
        self.delay_sum_us = 0
        self.delay_count = 0
        self.live_uids: set[int] = set()
        self.energy_by_node: dict[int, float] = {}

    def consume(self, ev: TraceEvent) -> None:
        action = ev.action
        if action == "e":
            node = ev.node
            self.energy_by_node[node] = self.energy_by_node.get(node, 0.0) + ev.energy
            return
        kind = ev.kind
        if action in ("s", "f"):
            if ev.layer == "RTR" and kind in CONTROL_KINDS:
                self.routing_packets += 1
            elif ev.layer == "AGT" and kind == "DATA" and action == "s":
                self.data_sent += 1
                # Only the first AGT send of a uid starts its delay clock.
                if ev.uid not in self.send_time_us:
                    self.send_time_us[ev.uid] = ev.time_us
                self.live_uids.add(ev.uid)
        elif action == "r":
            if ev.layer == "AGT" and kind == "DATA":
                self.data_received += 1
                self.live_uids.discard(ev.uid)
                start = self.send_time_us.get(ev.uid)
                if start is not None:
                    self.delay_sum_us += ev.time_us - start
                    self.delay_count += 1
        elif action == "d":
            if kind == "DATA":
                if ev.reason in self.drops:
                    self.drops[ev.reason] += 1
                if ev.reason in TERMINAL_REASONS:
                    self.terminal_drops += 1
                    self.live_uids.discard(ev.uid)

    @property
    def in_flight(self) -> int:
        return len(self.live_uids)


class Trace:
    """Append-only event log: feeds the aggregator, optionally keeps records
    in memory and/or streams formatted lines to a file object."""

    def __init__(self, keep_records: bool = True, sink=None):
        self.keep_records = keep_records
        self.sink = sink
        self.records: list[TraceEvent] = []
        self.agg = MetricsAggregator()

    def emit(self, time_us, action, layer, node, kind=None, uid=None,
             reason=None, size=0, energy=0.0) -> None:
        ev = TraceEvent(time_us, action, layer, node, kind, uid, reason, size, energy)
        self.agg.consume(ev)
        if self.keep_records:
            self.records.append(ev)
        if self.sink is not None:
            self.sink.write(format_event(ev) + "\n")

    def __len__(self) -> int:
        return len(self.records)


def aggregate(records) -> MetricsAggregator:
    agg = MetricsAggregator()
    for ev in records:
        agg.consume(ev)
    return agg


def compute_delivery_metrics(records) -> tuple[float, float, float]:
    """(srn, td, dm).

    srn: control-packet sends+forwards at RTR per delivered data packet.
    td: delivered / generated data packets.
    dm: mean end-to-end delay in seconds over delivered packets.
    srn and dm are NaN when nothing was delivered; td is then 0.
    """
    agg = records if isinstance(records, MetricsAggregator) else aggregate(records)
    if agg.data_received == 0:
        td = 0.0 if agg.data_sent else 0.0
        return (math.nan, td, math.nan)
    srn = agg.routing_packets / agg.data_received
    td = agg.data_received / agg.data_sent if agg.data_sent else 0.0
    dm = agg.delay_sum_us / agg.delay_count / US_PER_S
    return (srn, td, dm)


def compute_energy_metrics(ledger, records, n_nodes: int, initial: float) -> tuple[float, float, float]:
    """(ecp, etecn, term) from the energy ledger.

    ecp: total consumed energy per delivered data packet (NaN if none).
    etecn: population standard deviation (divisor N) of per-node consumption.
    term: minimum residual/initial ratio across nodes.
    """
    agg = records if isinstance(records, MetricsAggregator) else aggregate(records)
    consumed = [ledger.consumed(n) for n in range(n_nodes)]
    total = sum(consumed)
    ecp = total / agg.data_received if agg.data_received else math.nan
    mean = total / n_nodes
    variance = sum((c - mean) ** 2 for c in consumed) / n_nodes
    etecn = math.sqrt(variance)
    term = min(ledger.residual(n) / initial for n in range(n_nodes))
    return (ecp, etecn, term)


def drop_census(records) -> dict[str, int]:
    """Data-packet drop counts per reason (all reasons present, zero-filled)."""
    agg = records if isinstance(records, MetricsAggregator) else aggregate(records)
    return dict(agg.drops)


def packet_accounting(records) -> tuple[int, int, int, int]:
    """(data_sent, delivered, terminal_drops, in_flight_at_end)."""
    agg = records if isinstance(records, MetricsAggregator) else aggregate(records)
    return (agg.data_sent, agg.data_received, agg.terminal_drops, agg.in_flight)


@dataclass
class MetricsReport:
    """One run's results: the six metrics plus raw counters."""

    srn: float
    td: float
    dm: float
    ecp: float
    etecn: float
    term: float
    data_sent: int
    data_received: int
    routing_packets: int
    drops: dict[str, int] = field(default_factory=dict)
    in_flight: int = 0

    @classmethod
    def from_run(cls, agg: MetricsAggregator, ledger, n_nodes: int, initial: float) -> "MetricsReport":
        srn, td, dm = compute_delivery_metrics(agg)
        ecp, etecn, term = compute_energy_metrics(ledger, agg, n_nodes, initial)
        return cls(
            srn=srn, td=td, dm=dm, ecp=ecp, etecn=etecn, term=term,
            data_sent=agg.data_sent, data_received=agg.data_received,
            routing_packets=agg.routing_packets, drops=dict(agg.drops),
            in_flight=agg.in_flight,
        )
