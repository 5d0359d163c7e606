"""Discrete-event simulator for MEA-DSR and baseline DSR in mobile ad-hoc networks."""

from .metrics import MetricsReport, Trace, TraceEvent
from .mobility import MobilityScenario, Waypoint, generate_rwp, position_at
from .radio_mac import EnergyLedger, Frame, RadioConfig, RadioMac
from .runner import RunOutput, run_scenario
from .scenario import ScenarioConfig, parse_config, serialize_config, sweep_grid
from .sim_core import EventQueue, RngStream, RngStreams
from .traffic import Connection, emission_schedule, generate_connections

__all__ = [
    "Connection",
    "EnergyLedger",
    "EventQueue",
    "Frame",
    "MetricsReport",
    "MobilityScenario",
    "RadioConfig",
    "RadioMac",
    "RngStream",
    "RngStreams",
    "RunOutput",
    "ScenarioConfig",
    "Trace",
    "TraceEvent",
    "Waypoint",
    "emission_schedule",
    "generate_connections",
    "generate_rwp",
    "parse_config",
    "position_at",
    "run_scenario",
    "serialize_config",
    "sweep_grid",
]

__version__ = "0.1.0"
