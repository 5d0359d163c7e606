"""Source-routing machinery shared by MEA-DSR and the DSR baseline.

Packets carry the full ordered node list of their path; forwarders follow
it without routing tables.  This module owns the pieces both protocols
share: packet types, the per-destination send buffer with its route-wait
timeout, discovery retry with exponential backoff, data forwarding with a
TTL, and route-error propagation along the reversed route prefix.

Protocol-specific behavior (RREQ handling, route caches, reply policy,
salvaging) lives in the subclasses.
"""

from dataclasses import dataclass, field

from .radio_mac import BROADCAST, Frame, frame_size
from .sim_core import s_to_us

TTL_INIT = 64
SEND_BUFFER_CAP = 64
SEND_BUFFER_TIMEOUT_US = s_to_us(30.0)
DISCOVERY_BACKOFF_US = s_to_us(0.5)
DISCOVERY_BACKOFF_CAP_US = s_to_us(10.0)
BROADCAST_JITTER_US = 10_000      # de-synchronizes flood rebroadcasts


@dataclass
class DataPacket:
    uid: int
    src: int
    dest: int
    route: tuple            # full source route (src, ..., dest)
    cursor: int             # index of the node currently holding the packet
    ttl: int
    size: int               # payload bytes
    salvage_count: int = 0
    salvaged_at: set = field(default_factory=set)


@dataclass
class RouteRequest:
    src: int
    dest: int
    seq: int
    route: tuple            # traversed forwarders, excludes src and dest
    min_bat_lev: float      # min residual energy over stamping nodes (inf until first stamp)
    uid: int = 0


@dataclass
class RouteReply:
    initiator: int          # discovery source; final receiver of this reply
    replier: int
    seq: int
    route: tuple            # full source route being delivered (initiator, ..., dest)
    path: tuple             # nodes the reply traverses, path[0] = replier
    uid: int = 0


@dataclass
class RouteError:
    reporter: int
    broken: tuple           # (from, to) link that failed
    target: int             # traffic source being informed
    flow_dest: int          # destination of the flow whose packet failed
    path: tuple             # nodes the error traverses, path[0] = reporter
    uid: int = 0


class _Pending:
    __slots__ = ("seq", "backoff_us", "timer")

    def __init__(self, seq, backoff_us, timer):
        self.seq = seq
        self.backoff_us = backoff_us
        self.timer = timer


class _Buffered:
    __slots__ = ("uid", "size", "timer")

    def __init__(self, uid, size, timer):
        self.uid = uid
        self.size = size
        self.timer = timer


class Services:
    """Run-wide facilities handed to every routing node."""

    def __init__(self, queue, mac, trace, ledger, jitter_rng, wt_us=60_000, observer=None):
        self.queue = queue
        self.mac = mac
        self.trace = trace
        self.ledger = ledger
        self.jitter_rng = jitter_rng
        self.wt_us = wt_us
        self.observer = observer
        self._uid = 0

    def next_uid(self) -> int:
        self._uid += 1
        return self._uid


class SourceRoutingNode:
    """Base protocol instance owned by one node inside the event loop."""

    def __init__(self, node_id: int, sv: Services):
        self.id = node_id
        self.sv = sv
        self._seq = 0
        self.send_buffer: dict[int, list[_Buffered]] = {}
        self.pending: dict[int, _Pending] = {}
        self.last_discovery_seq: dict[int, int] = {}

    # -- protocol-specific hooks -------------------------------------------

    def route_for(self, dest: int):
        """Current source route to dest, or None."""
        raise NotImplementedError

    def handle_rreq(self, rreq: RouteRequest, from_node: int) -> None:
        raise NotImplementedError

    def install_route(self, rrep: RouteReply) -> None:
        raise NotImplementedError

    def purge_link(self, link: tuple) -> None:
        raise NotImplementedError

    def on_data_link_break(self, pkt: DataPacket, broken: tuple) -> None:
        raise NotImplementedError

    def on_rerr_at_target(self, rerr: RouteError) -> None:
        pass

    def learn_from_rrep(self, rrep: RouteReply) -> None:
        pass

    def learn_from_data(self, pkt: DataPacket) -> None:
        pass

    # -- traffic entry point -----------------------------------------------

    def originate_data(self, dest: int, size: int) -> int:
        """Hand one application packet to the routing layer."""
        sv = self.sv
        uid = sv.next_uid()
        now = sv.queue.now_us
        sv.trace.emit(now, "s", "AGT", self.id, "DATA", uid, size=size)
        route = self.route_for(dest)
        if route is not None:
            self._send_data(uid, size, route, "s")
        else:
            self._buffer_packet(dest, uid, size)
            if dest not in self.pending:
                self._start_discovery(dest)
        return uid

    # -- frame reception -----------------------------------------------------

    def on_frame(self, frame: Frame) -> None:
        sv = self.sv
        now = sv.queue.now_us
        sv.trace.emit(now, "r", "RTR", self.id, frame.kind, frame.uid, size=frame.size)
        pkt = frame.payload
        if frame.kind == "DATA":
            self._handle_data(pkt)
        elif frame.kind == "RREQ":
            self.handle_rreq(pkt, frame.src)
        elif frame.kind == "RREP":
            self._handle_rrep(pkt)
        elif frame.kind == "RERR":
            self._handle_rerr(pkt)

    def on_link_failure(self, frame: Frame) -> None:
        """MAC exhausted its retries for a unicast frame of ours."""
        sv = self.sv
        now = sv.queue.now_us
        if frame.kind == "DATA":
            pkt = frame.payload
            broken = (self.id, frame.link_dst)
            self.on_data_link_break(pkt, broken)
        else:
            # No nested error reporting for control packets.
            sv.trace.emit(now, "d", "RTR", self.id, frame.kind, frame.uid,
                          "TOUT", frame.size)

    # -- data path -----------------------------------------------------------

    def _handle_data(self, pkt: DataPacket) -> None:
        pkt.cursor += 1
        if self.id == pkt.dest:
            self.sv.trace.emit(self.sv.queue.now_us, "r", "AGT", self.id,
                               "DATA", pkt.uid, size=pkt.size)
            return
        pkt.ttl -= 1
        if pkt.ttl <= 0:
            self.sv.trace.emit(self.sv.queue.now_us, "d", "RTR", self.id,
                               "DATA", pkt.uid, "TTL", pkt.size)
            return
        self.learn_from_data(pkt)
        self._tx_data(pkt, "f")

    def _send_data(self, uid: int, size: int, route: tuple, action: str) -> None:
        pkt = DataPacket(uid, self.id, route[-1], route, 0, TTL_INIT, size)
        self._tx_data(pkt, action)

    def _tx_data(self, pkt: DataPacket, action: str) -> None:
        size = frame_size("DATA", len(pkt.route), pkt.size)
        next_hop = pkt.route[pkt.cursor + 1]
        self.sv.trace.emit(self.sv.queue.now_us, action, "RTR", self.id,
                           "DATA", pkt.uid, size=size)
        frame = Frame("DATA", self.id, next_hop, size, pkt, pkt.uid)
        self.sv.mac.enqueue_frame(self.id, frame)

    # -- send buffer -----------------------------------------------------------

    def _buffer_packet(self, dest: int, uid: int, size: int) -> None:
        buf = self.send_buffer.setdefault(dest, [])
        now = self.sv.queue.now_us
        if len(buf) >= SEND_BUFFER_CAP:
            oldest = buf.pop(0)
            oldest.timer.cancel()
            self.sv.trace.emit(now, "d", "RTR", self.id, "DATA", oldest.uid,
                               "NRTE", oldest.size)
        timer = self.sv.queue.schedule(
            SEND_BUFFER_TIMEOUT_US, lambda: self._expire_buffered(dest, uid))
        buf.append(_Buffered(uid, size, timer))

    def _expire_buffered(self, dest: int, uid: int) -> None:
        buf = self.send_buffer.get(dest, [])
        for i, entry in enumerate(buf):
            if entry.uid == uid:
                buf.pop(i)
                self.sv.trace.emit(self.sv.queue.now_us, "d", "RTR", self.id,
                                   "DATA", uid, "NRTE", entry.size)
                return

    def _flush_buffer(self, dest: int) -> None:
        buf = self.send_buffer.get(dest)
        if not buf:
            return
        while buf:
            route = self.route_for(dest)
            if route is None:
                return
            entry = buf.pop(0)
            entry.timer.cancel()
            self._send_data(entry.uid, entry.size, route, "s")

    # -- discovery ---------------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _start_discovery(self, dest: int, backoff_us: int = DISCOVERY_BACKOFF_US) -> None:
        seq = self._next_seq()
        self.last_discovery_seq[dest] = seq
        timer = self.sv.queue.schedule(backoff_us, lambda: self._retry_discovery(dest))
        self.pending[dest] = _Pending(seq, backoff_us, timer)
        rreq = RouteRequest(self.id, dest, seq, (), float("inf"), self.sv.next_uid())
        self._broadcast_rreq(rreq, "s")

    def _retry_discovery(self, dest: int) -> None:
        pend = self.pending.pop(dest, None)
        if pend is None:
            return
        if not self.send_buffer.get(dest):
            return      # nothing waiting; let the discovery lapse
        backoff = min(pend.backoff_us * 2, DISCOVERY_BACKOFF_CAP_US)
        self._start_discovery(dest, backoff)

    def _complete_discovery(self, dest: int) -> None:
        pend = self.pending.pop(dest, None)
        if pend is not None:
            pend.timer.cancel()

    def _broadcast_rreq(self, rreq: RouteRequest, action: str) -> None:
        sv = self.sv
        size = frame_size("RREQ", len(rreq.route))
        sv.trace.emit(sv.queue.now_us, action, "RTR", self.id, "RREQ", rreq.uid, size=size)
        frame = Frame("RREQ", self.id, BROADCAST, size, rreq, rreq.uid)
        jitter = sv.jitter_rng.randint(0, BROADCAST_JITTER_US)
        node = self.id
        sv.queue.schedule(jitter, lambda: sv.mac.enqueue_frame(node, frame))

    # -- route replies ------------------------------------------------------------

    def send_rrep(self, rrep: RouteReply, action: str) -> None:
        sv = self.sv
        size = frame_size("RREP", len(rrep.route))
        sv.trace.emit(sv.queue.now_us, action, "RTR", self.id, "RREP", rrep.uid, size=size)
        i = rrep.path.index(self.id)
        frame = Frame("RREP", self.id, rrep.path[i + 1], size, rrep, rrep.uid)
        sv.mac.enqueue_frame(self.id, frame)

    def _handle_rrep(self, rrep: RouteReply) -> None:
        if self.id == rrep.initiator:
            self.install_route(rrep)
            return
        self.learn_from_rrep(rrep)
        self.send_rrep(rrep, "f")

    # -- route errors ---------------------------------------------------------------

    def send_rerr_for(self, pkt: DataPacket, broken: tuple) -> None:
        """Unicast a route error back along the packet's traversed prefix."""
        if pkt.cursor == 0:
            return      # the source detected the break itself
        path = tuple(reversed(pkt.route[: pkt.cursor + 1]))
        rerr = RouteError(self.id, broken, pkt.src, pkt.dest, path, self.sv.next_uid())
        self._tx_rerr(rerr, "s")

    def _tx_rerr(self, rerr: RouteError, action: str) -> None:
        sv = self.sv
        size = frame_size("RERR")
        sv.trace.emit(sv.queue.now_us, action, "RTR", self.id, "RERR", rerr.uid, size=size)
        i = rerr.path.index(self.id)
        frame = Frame("RERR", self.id, rerr.path[i + 1], size, rerr, rerr.uid)
        sv.mac.enqueue_frame(self.id, frame)

    def _handle_rerr(self, rerr: RouteError) -> None:
        self.purge_link(rerr.broken)
        obs = self.sv.observer
        if obs is not None:
            obs.on_rerr(self.id, rerr.broken, self.cached_routes_snapshot())
        if self.id == rerr.target:
            self.on_rerr_at_target(rerr)
        else:
            self._tx_rerr(rerr, "f")

    def cached_routes_snapshot(self) -> list:
        """All source routes currently cached (observer/testing aid)."""
        return []
