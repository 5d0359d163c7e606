"""CBR-over-datagram traffic: connection synthesis and emission schedules.

Connections are distinct (src, dst) pairs starting at a uniform random
time in [0, 120] s and staying active until the end of the run.  Each
emission is jittered by a per-packet uniform offset within the interval,
and the whole schedule is pre-generated so that paired runs of the two
protocols see byte-identical traffic.
"""

from dataclasses import dataclass

from .sim_core import RngStream, s_to_us

DEFAULT_START_WINDOW_S = 120.0
DEFAULT_MAX_PACKETS = 10_000


@dataclass(frozen=True)
class Connection:
    src: int
    dst: int
    start_s: float
    packet_size: int = 512
    interval_s: float = 0.25
    max_packets: int = DEFAULT_MAX_PACKETS


def generate_connections(
    n_nodes: int,
    n_connections: int,
    rate_pps: float,
    stream: RngStream,
    packet_size: int = 512,
    start_window_s: float = DEFAULT_START_WINDOW_S,
    max_packets: int = DEFAULT_MAX_PACKETS,
) -> list[Connection]:
    """Draw distinct source/destination pairs; sources may repeat."""
    if n_connections < 1:
        raise ValueError("need at least one connection")
    if rate_pps <= 0:
        raise ValueError("rate must be positive")
    if n_connections > n_nodes * (n_nodes - 1):
        raise ValueError(
            f"{n_connections} connections impossible with {n_nodes} nodes")
    interval = 1.0 / rate_pps
    used: set[tuple] = set()
    out = []
    for _ in range(n_connections):
        while True:
            src = stream.randint(0, n_nodes - 1)
            dst = stream.randint(0, n_nodes - 1)
            if src != dst and (src, dst) not in used:
                break
        used.add((src, dst))
        start = stream.uniform(0.0, start_window_s)
        out.append(Connection(src, dst, start, packet_size, interval, max_packets))
    return out


def emission_schedule(conn: Connection, sim_end_s: float, stream: RngStream) -> list[int]:
    """Emission times in microseconds for one connection.

    Packet k goes out at start + k*interval + U(0, interval); emission
    stops at max_packets or at the end of the run.
    """
    times = []
    for k in range(conn.max_packets):
        t = conn.start_s + k * conn.interval_s + stream.uniform(0.0, conn.interval_s)
        if t >= sim_end_s:
            break
        times.append(s_to_us(t))
    return times


def write_connections_file(connections: list[Connection], path) -> None:
    """One line per connection: src dst start_time packet_size interval max_packets."""
    with open(path, "w") as f:
        for c in connections:
            f.write(f"{c.src} {c.dst} {c.start_s:.6f} {c.packet_size}"
                    f" {c.interval_s:.6f} {c.max_packets}\n")


def read_connections_file(path) -> list[Connection]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            out.append(Connection(int(parts[0]), int(parts[1]), float(parts[2]),
                                  int(parts[3]), float(parts[4]), int(parts[5])))
    return out
