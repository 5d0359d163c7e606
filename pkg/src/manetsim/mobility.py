"""Random Waypoint mobility: scenario generation, position lookup, file I/O.

Scenarios are fully pre-generated so the same mobility can be replayed
under both routing protocols.  Each node's trajectory is a contiguous list
of legs; a leg moves from start_pos to dest_pos at a fixed speed and then
pauses.  Every node begins with a pause leg at its initial position, which
makes pause == sim_end equivalent to a fully static network.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass

from .sim_core import US_PER_S, RngStream, s_to_us


@dataclass(frozen=True)
class Waypoint:
    """One leg of a node trajectory: travel then pause.

    A stationary leg (pause only) has start_pos == dest_pos and speed 0.
    """

    start_us: int
    start_pos: tuple[float, float]
    dest_pos: tuple[float, float]
    speed: float          # m/s, 0 for stationary legs
    pause_s: float        # pause after arrival, seconds

    @property
    def travel_us(self) -> int:
        if self.start_pos == self.dest_pos:
            return 0
        dist = math.dist(self.start_pos, self.dest_pos)
        # Round travel time up so effective speed never exceeds the drawn one.
        return max(1, math.ceil(dist / self.speed * US_PER_S))

    @property
    def arrival_us(self) -> int:
        return self.start_us + self.travel_us

    @property
    def end_us(self) -> int:
        return self.arrival_us + s_to_us(self.pause_s)


class MobilityScenario:
    """Per-node ordered waypoint legs covering [0, span_us]."""

    def __init__(self, legs_by_node: dict[int, list[Waypoint]], area: tuple[float, float], span_us: int):
        self.legs_by_node = legs_by_node
        self.area = area
        self.span_us = span_us

    @property
    def n_nodes(self) -> int:
        return len(self.legs_by_node)


def generate_rwp(
    n_nodes: int,
    area: tuple[float, float],
    speed_range: tuple[float, float],
    pause_s: float,
    sim_end_s: float,
    stream: RngStream,
) -> MobilityScenario:
    """Generate a random-waypoint scenario.

    Each node starts at a uniform random position, pauses, then repeatedly
    picks a uniform random destination and a uniform speed in speed_range,
    travels in a straight line, pauses, and repeats until sim_end_s.
    """
    vmin, vmax = speed_range
    if vmin <= 0:
        raise ValueError("speed_min must be > 0 (RWP speed-decay pathology)")
    if vmin > vmax:
        raise ValueError(f"speed range [{vmin}, {vmax}] is empty")
    w, h = area
    if w <= 0 or h <= 0:
        raise ValueError("area dimensions must be positive")
    if pause_s < 0:
        raise ValueError("pause must be >= 0")

    span_us = s_to_us(sim_end_s)
    legs_by_node: dict[int, list[Waypoint]] = {}
    for node in range(n_nodes):
        pos = (stream.uniform(0.0, w), stream.uniform(0.0, h))
        legs = [Waypoint(0, pos, pos, 0.0, pause_s)]
        t = legs[-1].end_us
        while t <= span_us:
            dest = (stream.uniform(0.0, w), stream.uniform(0.0, h))
            speed = stream.uniform(vmin, vmax)
            leg = Waypoint(t, pos, dest, speed, pause_s)
            legs.append(leg)
            pos = dest
            t = leg.end_us
        legs_by_node[node] = legs
    return MobilityScenario(legs_by_node, area, span_us)


def _leg_position(leg: Waypoint, t_us: int) -> tuple[float, float]:
    travel = leg.travel_us
    dt = t_us - leg.start_us
    if dt >= travel:
        return leg.dest_pos
    frac = dt / travel
    x0, y0 = leg.start_pos
    x1, y1 = leg.dest_pos
    return (x0 + (x1 - x0) * frac, y0 + (y1 - y0) * frac)


def position_at(scenario: MobilityScenario, node: int, t_us: int) -> tuple[float, float]:
    """Position of node at time t_us: linear interpolation along the active leg."""
    if t_us < 0 or t_us > scenario.span_us:
        raise ValueError(f"t={t_us} outside scenario span [0, {scenario.span_us}]")
    legs = scenario.legs_by_node[node]
    starts = [leg.start_us for leg in legs]
    i = bisect_right(starts, t_us) - 1
    if i < 0:
        i = 0
    return _leg_position(legs[i], t_us)


class PositionTracker:
    """Amortized O(1) position lookup for time-monotone queries.

    The event loop queries positions at non-decreasing times, so a per-node
    cursor into the leg list avoids a bisect per query.  Arbitrary times
    still work (the cursor rewinds via bisect).
    """

    def __init__(self, scenario: MobilityScenario):
        self.scenario = scenario
        self._legs = {n: legs for n, legs in scenario.legs_by_node.items()}
        self._starts = {n: [leg.start_us for leg in legs] for n, legs in self._legs.items()}
        self._cursor = {n: 0 for n in self._legs}
        self._memo: dict[int, tuple[int, float, float]] = {}

    def position(self, node: int, t_us: int) -> tuple[float, float]:
        memo = self._memo.get(node)
        if memo is not None and memo[0] == t_us:
            return (memo[1], memo[2])
        legs = self._legs[node]
        i = self._cursor[node]
        if t_us < legs[i].start_us:
            i = max(0, bisect_right(self._starts[node], t_us) - 1)
        else:
            last = len(legs) - 1
            while i < last and legs[i + 1].start_us <= t_us:
                i += 1
        self._cursor[node] = i
        pos = _leg_position(legs[i], t_us)
        self._memo[node] = (t_us, pos[0], pos[1])
        return pos


def write_scenario_file(scenario: MobilityScenario, path) -> None:
    """One record per leg: node_id start_time x0 y0 x1 y1 speed pause."""
    with open(path, "w") as f:
        for node in sorted(scenario.legs_by_node):
            for leg in scenario.legs_by_node[node]:
                f.write(
                    f"{node} {leg.start_us / US_PER_S:.6f}"
                    f" {leg.start_pos[0]:.6f} {leg.start_pos[1]:.6f}"
                    f" {leg.dest_pos[0]:.6f} {leg.dest_pos[1]:.6f}"
                    f" {leg.speed:.6f} {leg.pause_s:.6f}\n"
                )


def read_scenario_file(path, area: tuple[float, float], span_us: int) -> MobilityScenario:
    legs_by_node: dict[int, list[Waypoint]] = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            node = int(parts[0])
            start_us = s_to_us(float(parts[1]))
            x0, y0, x1, y1, speed, pause = map(float, parts[2:8])
            legs_by_node.setdefault(node, []).append(
                Waypoint(start_us, (x0, y0), (x1, y1), speed, pause)
            )
    return MobilityScenario(legs_by_node, area, span_us)


def static_scenario(positions: list[tuple[float, float]], area: tuple[float, float], sim_end_s: float) -> MobilityScenario:
    """Fixed-position scenario (one stationary leg per node). Test helper."""
    span_us = s_to_us(sim_end_s)
    legs = {
        i: [Waypoint(0, pos, pos, 0.0, sim_end_s)]
        for i, pos in enumerate(positions)
    }
    return MobilityScenario(legs, area, span_us)
