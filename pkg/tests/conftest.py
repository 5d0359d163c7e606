"""Shared fixtures: a bare MAC world over a static topology."""

import pytest

from manetsim.metrics import Trace
from manetsim.mobility import PositionTracker, static_scenario
from manetsim.radio_mac import EnergyLedger, RadioConfig, RadioMac
from manetsim.sim_core import EventQueue, RngStream


class MacWorld:
    """RadioMac over fixed positions with delivery/failure capture."""

    def __init__(self, positions, cfg=None, initial_energy=1000.0, sim_end_s=3600.0):
        self.cfg = cfg or RadioConfig()
        self.queue = EventQueue()
        self.trace = Trace()
        area = (max(p[0] for p in positions) + 1, max(p[1] for p in positions) + 1)
        self.scenario = static_scenario(positions, area, sim_end_s)
        self.tracker = PositionTracker(self.scenario)
        self.ledger = EnergyLedger(len(positions), initial_energy)
        self.mac = RadioMac(self.cfg, self.queue, self.tracker, self.ledger,
                            self.trace, RngStream(1, "mac-backoff"), len(positions))
        self.delivered = []
        self.failures = []
        self.mac.deliver = lambda node, frame: self.delivered.append((node, frame))
        self.mac.link_failed = lambda node, frame: self.failures.append((node, frame))

    def run(self, seconds=10.0):
        self.queue.run_until(self.queue.now_us + int(seconds * 1_000_000))


@pytest.fixture
def mac_world():
    return MacWorld
