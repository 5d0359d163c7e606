"""Deterministic discrete-event engine: clock, event queue, named RNG streams.

Simulation time is an integer count of microseconds.  Floating-point event
times would make tie-breaking platform-dependent, so all scheduling happens
on the integer axis; seconds appear only at API edges.
"""

import heapq
import random

# 1 second = 1_000_000 microseconds (the scheduler tick).
US_PER_S = 1_000_000


def s_to_us(seconds: float) -> int:
    """Convert seconds to integer microseconds (round to nearest tick)."""
    return round(seconds * US_PER_S)


def us_to_s(us: int) -> float:
    return us / US_PER_S


class SimFaultError(Exception):
    """Programming fault detected by the engine (e.g. scheduling in the past)."""


class EventHandle:
    """Returned by schedule(); permits cancellation before dispatch."""

    __slots__ = ("fire_us", "seq", "fn", "cancelled")

    def __init__(self, fire_us: int, seq: int, fn):
        self.fire_us = fire_us
        self.seq = seq
        self.fn = fn
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


class EventQueue:
    """Global time-ordered event queue with a deterministic total order.

    Events dispatch in (fire_time, sequence_number) order; the sequence
    number is a monotone counter assigned at schedule time, so two events
    with equal fire times dispatch in scheduling order on every platform.
    """

    def __init__(self):
        self.now_us = 0
        self._heap: list[tuple[int, int, EventHandle]] = []
        self._seq = 0
        self.dispatched = 0

    def schedule(self, delay_us: int, fn) -> EventHandle:
        """Queue fn to run delay_us microseconds from now."""
        return self.schedule_at(self.now_us + delay_us, fn)

    def schedule_at(self, fire_us: int, fn) -> EventHandle:
        if fire_us < self.now_us:
            raise SimFaultError(
                f"event scheduled in the past: t={fire_us} < now={self.now_us}"
            )
        self._seq += 1
        handle = EventHandle(fire_us, self._seq, fn)
        heapq.heappush(self._heap, (fire_us, self._seq, handle))
        return handle

    def run_until(self, t_end_us: int) -> int:
        """Dispatch every event with fire_time <= t_end_us; clock ends at t_end_us.

        Returns the number of events dispatched by this call.
        """
        if t_end_us < self.now_us:
            raise SimFaultError(
                f"run_until target {t_end_us} precedes clock {self.now_us}"
            )
        n = 0
        heap = self._heap
        while heap and heap[0][0] <= t_end_us:
            fire_us, _, handle = heapq.heappop(heap)
            if handle.cancelled:
                continue
            self.now_us = fire_us
            handle.fn()
            n += 1
        self.now_us = t_end_us
        self.dispatched += n
        return n


class RngStream:
    """Reproducible random stream identified by (seed, label).

    Seeding goes through Python's string seeding (SHA-512 based), which is
    stable across platforms and unaffected by hash randomization.  Streams
    with different labels are independent, so adding a consumer never
    perturbs existing draw sequences.
    """

    def __init__(self, seed: int, label: str):
        self.seed = seed
        self.label = label
        self._rng = random.Random(f"{label}#{seed}")

    def uniform(self, lo: float, hi: float) -> float:
        if not lo < hi:
            raise ValueError(f"empty range [{lo}, {hi})")
        return self._rng.uniform(lo, hi)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return self._rng.randint(lo, hi)

    def choice(self, seq):
        if not seq:
            raise ValueError("empty sequence")
        return self._rng.choice(seq)


class RngStreams:
    """Factory handing out one RngStream per label for a run seed."""

    def __init__(self, seed: int):
        self.seed = seed
        self._streams: dict[str, RngStream] = {}

    def stream(self, label: str) -> RngStream:
        if label not in self._streams:
            self._streams[label] = RngStream(self.seed, label)
        return self._streams[label]
