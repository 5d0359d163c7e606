"""Unit-disk radio and an abstracted 802.11-DCF MAC.

Propagation is a hard 250 m disk (boundary inclusive): connectivity is all
the routing layer observes, so no fading model is needed.  The MAC keeps
the effects the protocol comparison depends on: a bounded interface queue
with control-over-data priority, carrier sensing, uniform random backoff,
collision loss at receivers covered by overlapping transmissions, and a
retry limit whose exhaustion surfaces to routing as a link break.

Only transmission delay and contention delay are modeled; propagation and
processing delays are zero.  Energy is charged per frame: the sender at
tx_power for the frame duration, and every alive node in range at rx_power
for the same duration (promiscuous reception).

Trace semantics: receptions log 'r' at RTR; per-receiver losses (collision,
receiver death) log 'd' at MAC and are not terminal for unicast frames,
which the sender retries.  Terminal drops are logged at RTR/IFQ.
"""

import math
from dataclasses import dataclass, field

from .sim_core import US_PER_S, EventQueue, RngStream

BROADCAST = -1

SLOT_US = 20
DIFS_US = 50
CW_MIN = 31
CW_MAX = 1023
RETRY_LIMIT = 4          # total transmission attempts for a unicast frame
NAV_PROTECTED_KINDS = frozenset(("RREP", "RERR"))

# Per-frame byte sizes: fixed header per kind + 4 bytes per carried route id.
FIXED_BYTES = {"DATA": 16, "RREQ": 24, "RREP": 24, "RERR": 20}


def frame_size(kind: str, route_ids: int = 0, payload_bytes: int = 0) -> int:
    if kind == "RERR":
        return FIXED_BYTES["RERR"]
    return FIXED_BYTES[kind] + 4 * route_ids + (payload_bytes if kind == "DATA" else 0)


@dataclass(frozen=True)
class RadioConfig:
    range_m: float = 250.0
    bitrate: float = 2_000_000.0
    tx_power: float = 1.4
    rx_power: float = 1.0
    ifq_capacity: int = 50

    def __post_init__(self):
        for name in ("range_m", "bitrate", "tx_power", "rx_power", "ifq_capacity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    def tx_duration_us(self, size_bytes: int) -> int:
        return math.ceil(size_bytes * 8 * US_PER_S / self.bitrate)


@dataclass
class Frame:
    kind: str                 # DATA / RREQ / RREP / RERR
    src: int                  # link-layer sender
    link_dst: int             # next hop, or BROADCAST
    size: int
    payload: object = None
    uid: int = 0


class EnergyLedger:
    """Per-node energy bookkeeping; a node dies when its residual hits zero."""

    def __init__(self, n_nodes: int, initial: float = 1000.0):
        self.n_nodes = n_nodes
        self.initial = initial
        self.consumed_tx = [0.0] * n_nodes
        self.consumed_rx = [0.0] * n_nodes
        self.dead: set[int] = set()

    def alive(self, node: int) -> bool:
        return node not in self.dead

    def consumed(self, node: int) -> float:
        return self.consumed_tx[node] + self.consumed_rx[node]

    def residual(self, node: int) -> float:
        return self.initial - self.consumed_tx[node] - self.consumed_rx[node]

    def charge(self, node: int, role: str, duration_us: int, power: float) -> tuple[float, bool]:
        """Charge power*duration; clamp at the residual.  Returns (joules, died)."""
        if node in self.dead:
            return (0.0, False)
        amount = power * (duration_us / US_PER_S)
        residual = self.residual(node)
        died = amount >= residual
        if died:
            amount = residual
            self.dead.add(node)
        if role == "tx":
            self.consumed_tx[node] += amount
        else:
            self.consumed_rx[node] += amount
        return (amount, died)


_IDLE, _CONTEND, _TX, _DEAD = range(4)


class _Tx:
    __slots__ = ("sender", "start_us", "end_us", "coverage", "nav", "interferers", "frame")

    def __init__(self, sender, start_us, end_us, coverage, nav, frame):
        self.sender = sender
        self.start_us = start_us
        self.end_us = end_us
        self.coverage = coverage
        self.nav = nav          # nodes silenced by the receiver's CTS
        self.interferers = []
        self.frame = frame


class _NodeMac:
    __slots__ = ("ctrl", "data", "state", "pending", "attempts")

    def __init__(self):
        self.ctrl = []
        self.data = []
        self.state = _IDLE
        self.pending = None
        self.attempts = 0


class RadioMac:
    """Shared medium plus one MAC instance per node, driven by the event loop.

    The owner wires `deliver(node, frame)` and `link_failed(node, frame)` to
    the routing layer after construction.
    """

    def __init__(self, cfg: RadioConfig, queue: EventQueue, tracker, ledger: EnergyLedger,
                 trace, backoff_rng: RngStream, n_nodes: int):
        self.cfg = cfg
        self.queue = queue
        self.tracker = tracker
        self.ledger = ledger
        self.trace = trace
        self.rng = backoff_rng
        self.n_nodes = n_nodes
        self.nodes = [_NodeMac() for _ in range(n_nodes)]
        self.active: dict[int, _Tx] = {}
        self._tx_id = 0
        self._range_sq = cfg.range_m * cfg.range_m
        self.deliver = lambda node, frame: None
        self.link_failed = lambda node, frame: None

    # -- topology ---------------------------------------------------------

    def neighbors(self, node: int, t_us: int) -> list[int]:
        """Alive nodes within range of `node` at time t (boundary inclusive)."""
        pos = self.tracker.position
        x, y = pos(node, t_us)
        alive = self.ledger.alive
        out = []
        for n in range(self.n_nodes):
            if n == node or not alive(n):
                continue
            nx, ny = pos(n, t_us)
            dx = nx - x
            dy = ny - y
            if dx * dx + dy * dy <= self._range_sq:
                out.append(n)
        return out

    # -- queueing ---------------------------------------------------------

    def enqueue_frame(self, node: int, frame: Frame) -> str:
        """FIFO interface queue; control frames get priority over data."""
        mac = self.nodes[node]
        if not self.ledger.alive(node):
            self.trace.emit(self.queue.now_us, "d", "RTR", node, frame.kind,
                            frame.uid, "NODE_DEAD", frame.size)
            return "dead"
        if len(mac.ctrl) + len(mac.data) >= self.cfg.ifq_capacity:
            self.trace.emit(self.queue.now_us, "d", "IFQ", node, frame.kind,
                            frame.uid, "IFQ", frame.size)
            return "dropped_IFQ"
        (mac.ctrl if frame.kind != "DATA" else mac.data).append(frame)
        self._kick(node)
        return "accepted"

    def queue_depth(self, node: int) -> int:
        mac = self.nodes[node]
        return len(mac.ctrl) + len(mac.data)

    def _kick(self, node: int) -> None:
        mac = self.nodes[node]
        if mac.state != _IDLE:
            return
        if mac.ctrl:
            mac.pending = mac.ctrl.pop(0)
        elif mac.data:
            mac.pending = mac.data.pop(0)
        else:
            return
        mac.attempts = 0
        mac.state = _CONTEND
        self._contend(node)

    # -- contention -------------------------------------------------------

    def _cw(self, attempts: int) -> int:
        return min((CW_MIN + 1) << attempts, CW_MAX + 1) - 1

    def _contend(self, node: int) -> None:
        backoff = DIFS_US + self.rng.randint(0, self._cw(self.nodes[node].attempts)) * SLOT_US
        self.queue.schedule(backoff, lambda: self._sense(node))

    def _sense(self, node: int) -> None:
        mac = self.nodes[node]
        if mac.state != _CONTEND:
            return
        now = self.queue.now_us
        covering_end = -1
        for tx in self.active.values():
            if tx.end_us > now and (node in tx.coverage or node in tx.nav):
                covering_end = max(covering_end, tx.end_us)
        if covering_end >= 0:
            # Medium busy: defer to the end of the covering transmissions,
            # then contend again with a fresh backoff.
            wait = covering_end - now + DIFS_US
            wait += self.rng.randint(0, self._cw(mac.attempts)) * SLOT_US
            self.queue.schedule(wait, lambda: self._sense(node))
            return
        self._start_tx(node)

    # -- transmission -----------------------------------------------------

    def _start_tx(self, node: int) -> None:
        mac = self.nodes[node]
        frame = mac.pending
        now = self.queue.now_us
        duration = self.cfg.tx_duration_us(frame.size)
        joules, died = self.ledger.charge(node, "tx", duration, self.cfg.tx_power)
        self.trace.emit(now, "e", "MAC", node, reason="tx", energy=joules)
        if died:
            # Not enough energy for the whole frame: nothing is delivered.
            self._on_death(node)
            return
        coverage = frozenset(self.neighbors(node, now))
        # Receiver-side virtual carrier sense for unicast control frames:
        # the receiver's neighborhood defers for the frame's duration.  Data
        # frames get no such protection; their hidden-terminal losses are
        # recovered by the retry budget instead.
        nav = frozenset()
        if (frame.kind in NAV_PROTECTED_KINDS and frame.link_dst != BROADCAST
                and self.ledger.alive(frame.link_dst)):
            nav = frozenset(self.neighbors(frame.link_dst, now))
        self._tx_id += 1
        tx = _Tx(node, now, now + duration, coverage, nav, frame)
        for other in self.active.values():
            if other.end_us > now:
                other.interferers.append(tx)
                tx.interferers.append(other)
        self.active[self._tx_id] = tx
        mac.state = _TX
        tx_id = self._tx_id
        self.queue.schedule(duration, lambda: self._end_tx(node, tx_id))

    def _end_tx(self, node: int, tx_id: int) -> None:
        tx = self.active.pop(tx_id)
        mac = self.nodes[node]
        if mac.state == _DEAD:
            # Sender died mid-frame (concurrent rx charge); nothing arrives.
            return
        mac.state = _IDLE
        frame = tx.frame
        duration = tx.end_us - tx.start_us
        delivered = []
        for r in sorted(tx.coverage):
            if not self.ledger.alive(r):
                continue
            joules, died = self.ledger.charge(r, "rx", duration, self.cfg.rx_power)
            self.trace.emit(tx.end_us, "e", "MAC", r, reason="rx", energy=joules)
            if died:
                self._on_death(r)
                self.trace.emit(tx.end_us, "d", "MAC", r, frame.kind, frame.uid,
                                "NODE_DEAD", frame.size)
                continue
            # Lost if any overlapping transmission reaches r, or r itself
            # transmitted during the window (half-duplex).
            lost = any(itx.sender == r or r in itx.coverage for itx in tx.interferers)
            if lost:
                self.trace.emit(tx.end_us, "d", "MAC", r, frame.kind, frame.uid,
                                "COLLISION", frame.size)
                continue
            delivered.append(r)

        if frame.link_dst == BROADCAST:
            mac.pending = None
            for r in delivered:
                self.deliver(r, frame)
            self._kick(node)
            return

        if frame.link_dst in delivered:
            mac.pending = None
            self.deliver(frame.link_dst, frame)
            self._kick(node)
            return

        mac.attempts += 1
        if mac.attempts < RETRY_LIMIT:
            mac.state = _CONTEND
            self._contend(node)
        else:
            mac.pending = None
            self.link_failed(node, frame)
            self._kick(node)

    # -- death ------------------------------------------------------------

    def _on_death(self, node: int) -> None:
        """Flush a dead node's queued and in-service frames."""
        mac = self.nodes[node]
        now = self.queue.now_us
        doomed = []
        if mac.pending is not None:
            doomed.append(mac.pending)
            mac.pending = None
        doomed.extend(mac.ctrl)
        doomed.extend(mac.data)
        mac.ctrl.clear()
        mac.data.clear()
        mac.state = _DEAD
        for frame in doomed:
            self.trace.emit(now, "d", "RTR", node, frame.kind, frame.uid,
                            "NODE_DEAD", frame.size)
