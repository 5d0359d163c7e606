"""Baseline DSR for paired comparison.

Classic on-demand source routing: flooding discovery with unconditional
duplicate suppression, intermediate nodes replying from their caches by
concatenating the accumulated route with a cached suffix, an unbounded
path cache per node, and salvaging of stranded data packets.  Promiscuous
listening, gratuitous replies, and route shortening are not modeled.
"""

from .meadsr import route_uses_link
from .routing import RouteReply, RouteRequest, SourceRoutingNode

MAX_SALVAGE_COUNT = 15


class DsrRouteCache:
    """Unbounded per-destination store of source routes from the owning node."""

    def __init__(self, owner: int):
        self.owner = owner
        self.routes: dict[int, list[tuple]] = {}

    def insert(self, route: tuple) -> None:
        if len(route) < 2 or route[0] != self.owner:
            return
        if len(set(route)) != len(route):
            return      # never cache a looping route
        dest = route[-1]
        bucket = self.routes.setdefault(dest, [])
        if route not in bucket:
            bucket.append(route)

    def shortest_to(self, dest: int):
        bucket = self.routes.get(dest)
        if not bucket:
            return None
        return min(bucket, key=lambda r: (len(r), r))

    def purge_link(self, link: tuple) -> None:
        for dest in list(self.routes):
            kept = [r for r in self.routes[dest] if not route_uses_link(r, link)]
            if kept:
                self.routes[dest] = kept
            else:
                del self.routes[dest]

    def all_routes(self) -> list:
        return [r for bucket in self.routes.values() for r in bucket]


class DsrNode(SourceRoutingNode):
    def __init__(self, node_id, sv):
        super().__init__(node_id, sv)
        self.seen: set[tuple] = set()
        self.cache = DsrRouteCache(node_id)

    # -- source side -------------------------------------------------------

    def route_for(self, dest: int):
        return self.cache.shortest_to(dest)

    def cached_routes_snapshot(self) -> list:
        return self.cache.all_routes()

    def install_route(self, rrep: RouteReply) -> None:
        dest = rrep.route[-1]
        self.cache.insert(rrep.route)
        obs = self.sv.observer
        if obs is not None:
            obs.on_install(self.id, dest, rrep.route)
        if self.route_for(dest) is not None:
            self._complete_discovery(dest)
            self._flush_buffer(dest)

    def purge_link(self, link: tuple) -> None:
        self.cache.purge_link(link)

    # -- request processing --------------------------------------------------

    def handle_rreq(self, rreq: RouteRequest, from_node: int) -> None:
        if self.id == rreq.src or self.id in rreq.route:
            return
        key = (rreq.src, rreq.seq)
        if key in self.seen:
            return      # all duplicate copies are suppressed
        self.seen.add(key)

        if self.id == rreq.dest:
            full = (rreq.src,) + rreq.route + (self.id,)
            self._reply(rreq, full)
            return

        cached = self.cache.shortest_to(rreq.dest)
        if cached is not None:
            full = (rreq.src,) + rreq.route + cached
            if len(set(full)) == len(full):
                self._reply(rreq, full)
                return      # cache replies do not propagate the flood
        fwd = RouteRequest(rreq.src, rreq.dest, rreq.seq,
                           rreq.route + (self.id,), rreq.min_bat_lev, rreq.uid)
        self._broadcast_rreq(fwd, "f")

    def _reply(self, rreq: RouteRequest, full_route: tuple) -> None:
        back = tuple(reversed((rreq.src,) + rreq.route + (self.id,)))
        rrep = RouteReply(rreq.src, self.id, rreq.seq, full_route, back,
                          self.sv.next_uid())
        self.send_rrep(rrep, "s")

    # -- passive route learning (non-promiscuous) ------------------------------

    def learn_from_rrep(self, rrep: RouteReply) -> None:
        i = rrep.route.index(self.id)
        self.cache.insert(rrep.route[i:])

    def learn_from_data(self, pkt) -> None:
        suffix = pkt.route[pkt.cursor:]
        self.cache.insert(suffix)

    # -- maintenance -------------------------------------------------------------

    def on_data_link_break(self, pkt, broken) -> None:
        now = self.sv.queue.now_us
        self.purge_link(broken)
        self.send_rerr_for(pkt, broken)
        if pkt.salvage_count < MAX_SALVAGE_COUNT and self.id not in pkt.salvaged_at:
            repair = self.route_for(pkt.dest)
            if repair is not None:
                pkt.salvage_count += 1
                pkt.salvaged_at.add(self.id)
                pkt.route = pkt.route[: pkt.cursor + 1] + repair[1:]
                self._tx_data(pkt, "f")
                return
        self.sv.trace.emit(now, "d", "RTR", self.id, "DATA", pkt.uid, "TOUT", pkt.size)
