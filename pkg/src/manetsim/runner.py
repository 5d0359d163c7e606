"""Wire one scenario into a world and run it to completion.

A run owns its entire state (event queue, mobility, MAC, protocol
instances, trace), so independent runs can execute in parallel processes.
Mobility and traffic are pure functions of (config, seed) and independent
of the protocol choice, which guarantees paired comparisons see identical
scenarios.
"""

from dataclasses import dataclass

from .dsr_baseline import DsrNode
from .meadsr import MeaDsrNode
from .metrics import MetricsReport, Trace
from .mobility import MobilityScenario, PositionTracker, generate_rwp
from .radio_mac import EnergyLedger, RadioConfig, RadioMac
from .routing import Services
from .scenario import ScenarioConfig
from .sim_core import EventQueue, RngStreams, s_to_us
from .traffic import emission_schedule, generate_connections

PROTOCOL_CLASSES = {"MEA-DSR": MeaDsrNode, "DSR": DsrNode}


@dataclass
class RunOutput:
    config: ScenarioConfig
    report: MetricsReport
    trace: Trace
    ledger: EnergyLedger
    nodes: list
    connections: list
    mobility: MobilityScenario


def run_scenario(
    cfg: ScenarioConfig,
    mobility: MobilityScenario = None,
    connections: list = None,
    keep_records: bool = True,
    trace_sink=None,
    observer=None,
) -> RunOutput:
    cfg.validate()
    streams = RngStreams(cfg.seed)

    if mobility is None:
        mobility = generate_rwp(
            cfg.n_nodes, (cfg.area_width, cfg.area_height),
            (cfg.speed_min, cfg.speed_max), cfg.pause, cfg.sim_end,
            streams.stream("mobility"))
    if connections is None:
        connections = generate_connections(
            cfg.n_nodes, cfg.n_connections, cfg.pkt_rate,
            streams.stream("traffic"), packet_size=cfg.pkt_size)
    traffic_stream = streams.stream("traffic")
    schedules = [emission_schedule(c, cfg.sim_end, traffic_stream) for c in connections]

    queue = EventQueue()
    trace = Trace(keep_records=keep_records, sink=trace_sink)
    tracker = PositionTracker(mobility)
    ledger = EnergyLedger(cfg.n_nodes, cfg.initial_energy)
    radio = RadioConfig(range_m=cfg.range_m, bitrate=cfg.bitrate,
                        tx_power=cfg.tx_power, rx_power=cfg.rx_power)
    mac = RadioMac(radio, queue, tracker, ledger, trace,
                   streams.stream("mac-backoff"), cfg.n_nodes)
    sv = Services(queue, mac, trace, ledger, streams.stream("mac-backoff"),
                  wt_us=s_to_us(cfg.wt), observer=observer)
    node_cls = PROTOCOL_CLASSES[cfg.protocol]
    nodes = [node_cls(i, sv) for i in range(cfg.n_nodes)]

    mac.deliver = lambda node, frame: nodes[node].on_frame(frame)
    mac.link_failed = lambda node, frame: nodes[node].on_link_failure(frame)

    def emit(src, dst, size):
        if ledger.alive(src):
            nodes[src].originate_data(dst, size)

    for conn, times in zip(connections, schedules):
        for t_us in times:
            queue.schedule_at(
                t_us, lambda s=conn.src, d=conn.dst, z=conn.packet_size: emit(s, d, z))

    queue.run_until(s_to_us(cfg.sim_end))

    report = MetricsReport.from_run(trace.agg, ledger, cfg.n_nodes, cfg.initial_energy)
    return RunOutput(cfg, report, trace, ledger, nodes, connections, mobility)
