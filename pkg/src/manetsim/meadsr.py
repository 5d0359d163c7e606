"""MEA-DSR: multipath energy-aware on-demand source routing.

Route discovery floods route requests that accumulate the minimum residual
battery level seen along the way.  Intermediate nodes forward up to two
copies per discovery (the first, plus one arriving on a different link
with a route no longer than the first's).  Only the destination replies:
after a wait-time window it picks the candidate maximizing
min_bat_lev / route_length as the primary route, and the maximally
node-disjoint remaining candidate as the alternate.  Sources hold at most
those two routes, use one at a time, and never salvage.
"""

from dataclasses import dataclass, field

from .routing import RouteReply, RouteRequest, SourceRoutingNode


@dataclass
class RequestTableEntry:
    """Per-source duplicate-forwarding state at an intermediate node."""

    seq: int
    nb_hops: int                 # route length of the first accepted copy
    last_links: list = field(default_factory=list)   # neighbors that delivered forwarded copies

    @property
    def nb_copies(self) -> int:
        return len(self.last_links)


@dataclass
class RouteCandidate:
    """Destination-side candidate: a completed source route with its
    bottleneck energy and arrival time."""

    route: tuple            # full path (src, ..., dest)
    min_bat_lev: float
    arrival_us: int


FORWARD_FIRST = "forward_first"
FORWARD_COPY = "forward_copy"
DISCARD_STALE = "discard_stale_seq"
DISCARD_SAME_LINK = "discard_same_link"
DISCARD_LONGER = "discard_longer_route"
DISCARD_COPY_CAP = "discard_copy_cap"


def duplicate_forward_decision(entry, rreq: RouteRequest, arriving_link: int) -> str:
    """Forward/discard verdict for a request copy at an intermediate node.

    `entry` is the node's RequestTableEntry for rreq.src, or None.  A newer
    sequence number restarts the entry; for the current sequence, a second
    copy is forwarded only if it arrived on a different link, its route is
    no longer than the first copy's, and fewer than two copies went out.
    """
    if entry is None or rreq.seq > entry.seq:
        return FORWARD_FIRST
    if rreq.seq < entry.seq:
        return DISCARD_STALE
    if arriving_link in entry.last_links:
        return DISCARD_SAME_LINK
    if len(rreq.route) > entry.nb_hops:
        return DISCARD_LONGER
    if entry.nb_copies >= 2:
        return DISCARD_COPY_CAP
    return FORWARD_COPY


def update_min_bat_lev(min_bat_lev: float, residual: float) -> float:
    """Stamp a forwarder's residual energy into the bottleneck field.

    Origination carries +inf, so the source's first neighbor always
    overwrites; later forwarders only lower the value.
    """
    return residual if residual < min_bat_lev else min_bat_lev


def route_ratio(candidate: RouteCandidate) -> float:
    """Bottleneck energy divided by hop count of the full path."""
    return candidate.min_bat_lev / (len(candidate.route) - 1)


def _primary_key(c: RouteCandidate):
    # Max ratio; ties broken by earliest arrival, then lexicographic route.
    return (-route_ratio(c), c.arrival_us, c.route)


def select_primary_route(candidates: list) -> RouteCandidate:
    if not candidates:
        raise ValueError("primary selection requires at least one candidate")
    return min(candidates, key=_primary_key)


def shared_intermediates(route_a: tuple, route_b: tuple) -> int:
    """Number of common nodes between two routes, endpoints excluded."""
    if route_a[0] != route_b[0] or route_a[-1] != route_b[-1]:
        raise ValueError("routes must share their endpoints")
    return len(set(route_a[1:-1]) & set(route_b[1:-1]))


def select_alternate_route(candidates: list, primary: RouteCandidate):
    """Most node-disjoint remaining candidate; ratio breaks disjointness ties."""
    rest = [c for c in candidates if c.route != primary.route]
    if not rest:
        return None
    return min(rest, key=lambda c: (shared_intermediates(c.route, primary.route),
                                    -route_ratio(c), c.arrival_us, c.route))


class _CacheEntry:
    __slots__ = ("seq", "routes")

    def __init__(self, seq):
        self.seq = seq
        self.routes: list[tuple] = []


def route_uses_link(route: tuple, link: tuple) -> bool:
    """Whether the route traverses the link in either direction (802.11
    links are treated as bidirectional)."""
    a, b = link
    for u, v in zip(route, route[1:]):
        if (u == a and v == b) or (u == b and v == a):
            return True
    return False


class MeaDsrNode(SourceRoutingNode):
    def __init__(self, node_id, sv):
        super().__init__(node_id, sv)
        self.request_table: dict[int, RequestTableEntry] = {}
        self.route_table: dict[tuple, list[RouteCandidate]] = {}
        self.newest_seq: dict[int, int] = {}      # destination side, per source
        self._wt_armed: set[tuple] = set()
        self._wt_timers: dict[tuple, object] = {}
        self.cache: dict[int, _CacheEntry] = {}

    # -- source side ---------------------------------------------------------

    def route_for(self, dest: int):
        entry = self.cache.get(dest)
        if entry and entry.routes:
            return entry.routes[0]
        return None

    def cached_routes_snapshot(self) -> list:
        return [r for e in self.cache.values() for r in e.routes]

    def install_route(self, rrep: RouteReply) -> None:
        dest = rrep.route[-1]
        if rrep.seq != self.last_discovery_seq.get(dest):
            return      # reply to a superseded discovery
        entry = self.cache.get(dest)
        if entry is None or entry.seq != rrep.seq:
            entry = _CacheEntry(rrep.seq)
            self.cache[dest] = entry
        if len(entry.routes) >= 2 or rrep.route in entry.routes:
            return
        entry.routes.append(rrep.route)
        obs = self.sv.observer
        if obs is not None:
            obs.on_install(self.id, dest, rrep.route)
        if len(entry.routes) == 1:
            self._complete_discovery(dest)
            self._flush_buffer(dest)

    def purge_link(self, link: tuple) -> None:
        for dest in list(self.cache):
            entry = self.cache[dest]
            entry.routes = [r for r in entry.routes if not route_uses_link(r, link)]
            if not entry.routes:
                del self.cache[dest]

    def on_data_link_break(self, pkt, broken) -> None:
        # No salvaging: report, drop, and let the source fall back to its
        # alternate (or rediscover).
        now = self.sv.queue.now_us
        self.purge_link(broken)
        self.sv.trace.emit(now, "d", "RTR", self.id, "DATA", pkt.uid, "TOUT", pkt.size)
        if pkt.cursor == 0 and self.route_for(pkt.dest) is None:
            self._rediscover(pkt.dest)
        self.send_rerr_for(pkt, broken)

    def on_rerr_at_target(self, rerr) -> None:
        # Left with no valid route: start a fresh discovery right away.
        if self.route_for(rerr.flow_dest) is None:
            self._rediscover(rerr.flow_dest)

    def _rediscover(self, dest: int) -> None:
        if dest not in self.pending:
            self._start_discovery(dest)

    # -- request processing ----------------------------------------------------

    def handle_rreq(self, rreq: RouteRequest, from_node: int) -> None:
        if self.id == rreq.src or self.id in rreq.route:
            return
        if self.id == rreq.dest:
            self._accept_candidate(rreq)
            return

        entry = self.request_table.get(rreq.src)
        verdict = duplicate_forward_decision(entry, rreq, from_node)
        if verdict == FORWARD_FIRST:
            entry = RequestTableEntry(rreq.seq, len(rreq.route), [from_node])
            self.request_table[rreq.src] = entry
        elif verdict == FORWARD_COPY:
            entry.last_links.append(from_node)
        else:
            return

        obs = self.sv.observer
        if obs is not None:
            obs.on_forward(self.id, rreq, verdict, entry)

        residual = self.sv.ledger.residual(self.id)
        stamped = update_min_bat_lev(rreq.min_bat_lev, residual)
        fwd = RouteRequest(rreq.src, rreq.dest, rreq.seq,
                           rreq.route + (self.id,), stamped, rreq.uid)
        if obs is not None:
            obs.on_stamp(self.id, rreq.uid, stamped, residual,
                         len(self.sv.trace.records))
        self._broadcast_rreq(fwd, "f")

    # -- destination side ---------------------------------------------------------

    def _accept_candidate(self, rreq: RouteRequest) -> None:
        newest = self.newest_seq.get(rreq.src, -1)
        if rreq.seq < newest:
            return
        if rreq.seq > newest:
            self._purge_stale_rounds(rreq.src, rreq.seq)
            self.newest_seq[rreq.src] = rreq.seq
        key = (rreq.src, rreq.seq)
        full_route = (rreq.src,) + rreq.route + (self.id,)
        cand = RouteCandidate(full_route, rreq.min_bat_lev, self.sv.queue.now_us)
        self.route_table.setdefault(key, []).append(cand)
        if key not in self._wt_armed:
            self._wt_armed.add(key)
            self._wt_timers[key] = self.sv.queue.schedule(
                self.sv.wt_us, lambda: self._wt_fired(key))

    def _purge_stale_rounds(self, src: int, new_seq: int) -> None:
        for key in [k for k in self.route_table if k[0] == src and k[1] < new_seq]:
            del self.route_table[key]
            timer = self._wt_timers.pop(key, None)
            if timer is not None:
                timer.cancel()

    def _wt_fired(self, key: tuple) -> None:
        self._wt_timers.pop(key, None)
        candidates = self.route_table.get(key)
        if not candidates:
            raise RuntimeError(f"wait-time fired with no candidates for {key}")
        primary = select_primary_route(candidates)
        alternate = select_alternate_route(candidates, primary)
        src, seq = key
        obs = self.sv.observer
        if obs is not None:
            obs.on_select(self.id, src, seq, primary,
                          alternate, 2 if alternate else 1)
        self._unicast_reply(src, seq, primary.route)
        if alternate is not None:
            self._unicast_reply(src, seq, alternate.route)

    def _unicast_reply(self, src: int, seq: int, route: tuple) -> None:
        rrep = RouteReply(src, self.id, seq, route,
                          tuple(reversed(route)), self.sv.next_uid())
        self.send_rrep(rrep, "s")
