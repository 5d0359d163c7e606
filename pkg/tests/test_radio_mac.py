import pytest

from manetsim.radio_mac import (BROADCAST, EnergyLedger, Frame, RadioConfig,
                                RETRY_LIMIT, frame_size)


def data_frame(src, dst, size=532, uid=1):
    return Frame("DATA", src, dst, size, None, uid)


def test_radio_config_rejects_nonpositive():
    with pytest.raises(ValueError):
        RadioConfig(range_m=0)
    with pytest.raises(ValueError):
        RadioConfig(bitrate=-1)


def test_frame_sizes():
    assert frame_size("DATA", route_ids=4, payload_bytes=512) == 512 + 16 + 16
    assert frame_size("RREQ", route_ids=3) == 24 + 12
    assert frame_size("RREP", route_ids=5) == 24 + 20
    assert frame_size("RERR") == 20


def test_tx_duration_532_bytes_at_2mbps():
    assert RadioConfig().tx_duration_us(532) == 2128


def test_neighbors_boundary_inclusive(mac_world):
    w = mac_world([(0.0, 0.0), (0.0, 250.0), (0.0, 250.1), (900.0, 900.0)])
    assert w.mac.neighbors(0, 0) == [1]
    assert w.mac.neighbors(3, 0) == []


def test_dead_node_not_a_neighbor(mac_world):
    w = mac_world([(0.0, 0.0), (0.0, 100.0)])
    w.ledger.dead.add(1)
    assert w.mac.neighbors(0, 0) == []


def test_ifq_capacity_boundary(mac_world):
    w = mac_world([(0.0, 0.0), (0.0, 100.0)])
    # Head-of-line frame leaves the queue when service starts; fill while idle.
    for i in range(49):
        assert w.mac.enqueue_frame(0, data_frame(0, 1, uid=i)) == "accepted"
    # One frame is in service, 48 queued; two more reach the 50 cap.
    assert w.mac.queue_depth(0) == 48
    assert w.mac.enqueue_frame(0, data_frame(0, 1, uid=100)) == "accepted"
    assert w.mac.enqueue_frame(0, data_frame(0, 1, uid=101)) == "accepted"
    assert w.mac.queue_depth(0) == 50
    assert w.mac.enqueue_frame(0, data_frame(0, 1, uid=102)) == "dropped_IFQ"
    drops = [e for e in w.trace.records if e.action == "d" and e.reason == "IFQ"]
    assert len(drops) == 1 and drops[0].uid == 102 and drops[0].layer == "IFQ"


def test_enqueue_to_dead_node_discards_with_trace(mac_world):
    w = mac_world([(0.0, 0.0), (0.0, 100.0)])
    w.ledger.dead.add(0)
    assert w.mac.enqueue_frame(0, data_frame(0, 1)) == "dead"
    drops = [e for e in w.trace.records if e.action == "d"]
    assert drops[0].reason == "NODE_DEAD"


def test_unicast_delivery_and_energy_example(mac_world):
    # 532-byte frame at 2 Mbps: 2.128 ms on air, 2.9792 mJ at the sender,
    # 2.128 mJ at every in-range node (promiscuous reception).
    w = mac_world([(0.0, 0.0), (0.0, 100.0), (100.0, 0.0), (600.0, 600.0)])
    w.mac.enqueue_frame(0, data_frame(0, 1, size=532))
    w.run(1.0)
    assert [(n, f.uid) for n, f in w.delivered] == [(1, 1)]
    assert w.ledger.consumed_tx[0] == pytest.approx(1.4 * 2128e-6, rel=1e-12)
    assert w.ledger.consumed_rx[1] == pytest.approx(1.0 * 2128e-6, rel=1e-12)
    assert w.ledger.consumed_rx[2] == pytest.approx(1.0 * 2128e-6, rel=1e-12)
    assert w.ledger.consumed(3) == 0.0


def test_broadcast_reaches_all_in_range(mac_world):
    w = mac_world([(0.0, 0.0), (0.0, 200.0), (200.0, 0.0), (600.0, 600.0)])
    w.mac.enqueue_frame(0, Frame("RREQ", 0, BROADCAST, 24, None, 7))
    w.run(1.0)
    assert sorted(n for n, _ in w.delivered) == [1, 2]


def test_unicast_out_of_range_exhausts_retries(mac_world):
    w = mac_world([(0.0, 0.0), (500.0, 0.0)])
    w.mac.enqueue_frame(0, data_frame(0, 1))
    w.run(5.0)
    assert w.delivered == []
    assert [(n, f.uid) for n, f in w.failures] == [(0, 1)]
    # Each attempt pays transmit energy.
    assert w.ledger.consumed_tx[0] == pytest.approx(RETRY_LIMIT * 1.4 * 2128e-6, rel=1e-12)


def test_hidden_terminal_collision_loses_both(mac_world):
    # 0 and 2 cannot hear each other but both cover 1: overlapping frames
    # are lost at 1.
    w = mac_world([(0.0, 0.0), (200.0, 0.0), (400.0, 0.0)])
    w.mac.enqueue_frame(0, data_frame(0, 1, uid=11))
    w.mac.enqueue_frame(2, data_frame(2, 1, uid=22))
    # Max backoff spread (DIFS + 31 slots = 670 us) < frame time (2128 us),
    # so the two transmissions always overlap at node 1.
    w.queue.run_until(4000)
    collisions = [e for e in w.trace.records
                  if e.action == "d" and e.reason == "COLLISION" and e.node == 1]
    assert sorted(e.uid for e in collisions) == [11, 22]
    assert w.delivered == []


def test_carrier_sense_defers_in_range_senders(mac_world):
    # 0 and 1 hear each other; their frames to 2 must serialize, not collide.
    w = mac_world([(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)])
    w.mac.enqueue_frame(0, data_frame(0, 2, uid=1))
    w.mac.enqueue_frame(1, data_frame(1, 2, uid=2))
    w.run(1.0)
    assert sorted(f.uid for _, f in w.delivered) == [1, 2]


def test_charge_energy_examples():
    led = EnergyLedger(1, 1000.0)
    led.charge(0, "rx", 1_000_000, 1.0)
    assert led.residual(0) == pytest.approx(999.0)
    led2 = EnergyLedger(1, 1000.0)
    led2.charge(0, "tx", 1_000_000, 1.4)
    assert led2.residual(0) == pytest.approx(998.6)


def test_death_clamps_residual_and_blocks_delivery(mac_world):
    w = mac_world([(0.0, 0.0), (0.0, 100.0)], initial_energy=0.001)
    w.mac.enqueue_frame(0, data_frame(0, 1))
    w.run(1.0)
    assert w.ledger.residual(0) == 0.0
    assert not w.ledger.alive(0)
    assert w.delivered == []
    drops = [e for e in w.trace.records if e.action == "d" and e.node == 0]
    assert drops and drops[0].reason == "NODE_DEAD" and drops[0].layer == "RTR"


def test_dead_node_stops_receiving(mac_world):
    w = mac_world([(0.0, 0.0), (0.0, 100.0)])
    w.ledger.dead.add(1)
    w.mac.enqueue_frame(0, data_frame(0, 1))
    w.run(2.0)
    assert w.delivered == []
    assert w.ledger.consumed_rx[1] == 0.0
    assert len(w.failures) == 1


def test_queue_is_fifo_with_control_priority(mac_world):
    w = mac_world([(0.0, 0.0), (0.0, 100.0)])
    w.mac.enqueue_frame(0, data_frame(0, 1, uid=1))   # enters service
    w.mac.enqueue_frame(0, data_frame(0, 1, uid=2))
    w.mac.enqueue_frame(0, data_frame(0, 1, uid=3))
    w.mac.enqueue_frame(0, Frame("RREP", 0, 1, 24, None, 4))
    w.run(2.0)
    assert [f.uid for _, f in w.delivered] == [1, 4, 2, 3]


def test_energy_conservation_sum_matches_trace(mac_world):
    w = mac_world([(0.0, 0.0), (100.0, 0.0), (200.0, 0.0), (120.0, 90.0)])
    for i in range(20):
        w.mac.enqueue_frame(i % 3, data_frame(i % 3, (i + 1) % 3, uid=i))
    w.run(10.0)
    total_ledger = sum(w.ledger.consumed(n) for n in range(4))
    by_node = {}
    for e in w.trace.records:
        if e.action == "e":
            by_node[e.node] = by_node.get(e.node, 0.0) + e.energy
    assert sum(by_node.values()) == pytest.approx(total_ledger, rel=1e-12)
    for n, total in by_node.items():
        assert total == pytest.approx(w.ledger.consumed(n), rel=1e-12)
