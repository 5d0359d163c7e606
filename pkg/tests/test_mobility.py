import math

import pytest

from manetsim.mobility import (MobilityScenario, PositionTracker, Waypoint,
                               generate_rwp, position_at, read_scenario_file,
                               static_scenario, write_scenario_file)
from manetsim.sim_core import RngStream, s_to_us


def _scenario(**kw):
    args = dict(n_nodes=10, area=(1000.0, 1000.0), speed_range=(5.0, 10.0),
                pause_s=100.0, sim_end_s=600.0,
                stream=RngStream(kw.pop("seed", 1), "mobility"))
    args.update(kw)
    return generate_rwp(**args)


def test_leg_interpolation_midpoint():
    leg = Waypoint(0, (0.0, 0.0), (100.0, 0.0), 10.0, 0.0)
    scn = MobilityScenario({0: [leg]}, (1000.0, 1000.0), s_to_us(10.0))
    assert position_at(scn, 0, s_to_us(5.0)) == pytest.approx((50.0, 0.0))


def test_leg_endpoint_exact():
    leg = Waypoint(0, (0.0, 0.0), (100.0, 0.0), 10.0, 5.0)
    scn = MobilityScenario({0: [leg]}, (1000.0, 1000.0), leg.end_us)
    assert position_at(scn, 0, leg.arrival_us) == (100.0, 0.0)


def test_position_during_pause_is_destination():
    leg = Waypoint(0, (0.0, 0.0), (100.0, 0.0), 10.0, 5.0)
    scn = MobilityScenario({0: [leg]}, (1000.0, 1000.0), leg.end_us)
    assert position_at(scn, 0, leg.arrival_us + s_to_us(2.0)) == (100.0, 0.0)


def test_query_outside_span_rejected():
    scn = static_scenario([(0.0, 0.0)], (10.0, 10.0), 5.0)
    with pytest.raises(ValueError):
        position_at(scn, 0, s_to_us(5.0) + 1)
    with pytest.raises(ValueError):
        position_at(scn, 0, -1)


def test_pause_equal_to_sim_end_keeps_nodes_still():
    scn = _scenario(pause_s=600.0)
    for node in range(scn.n_nodes):
        p0 = position_at(scn, node, 0)
        for t_s in (100.0, 300.0, 600.0):
            assert position_at(scn, node, s_to_us(t_s)) == p0


def test_speeds_within_range():
    scn = _scenario(speed_range=(5.0, 10.0), sim_end_s=5000.0)
    speeds = [leg.speed for legs in scn.legs_by_node.values()
              for leg in legs if leg.speed > 0]
    assert len(speeds) > 100
    assert all(5.0 <= v <= 10.0 for v in speeds)


def test_all_positions_within_area():
    scn = _scenario()
    for node in range(scn.n_nodes):
        for t_s in range(0, 601, 7):
            x, y = position_at(scn, node, s_to_us(float(t_s)))
            assert 0.0 <= x <= 1000.0 and 0.0 <= y <= 1000.0


def test_displacement_bounded_by_vmax():
    scn = _scenario(seed=3)
    vmax = 10.0
    dt_s = 1.5
    for node in range(scn.n_nodes):
        prev = position_at(scn, node, 0)
        t = dt_s
        while t <= 600.0:
            cur = position_at(scn, node, s_to_us(t))
            assert math.dist(prev, cur) <= vmax * dt_s + 1e-6
            prev = cur
            t += dt_s


def test_legs_contiguous_and_shared_endpoints():
    scn = _scenario(seed=5)
    for legs in scn.legs_by_node.values():
        for a, b in zip(legs, legs[1:]):
            assert b.start_us == a.end_us
            assert b.start_pos == a.dest_pos


def test_generation_is_pure_function_of_seed():
    a = _scenario(seed=11)
    b = _scenario(seed=11)
    assert a.legs_by_node == b.legs_by_node
    c = _scenario(seed=12)
    assert a.legs_by_node != c.legs_by_node


def test_vmin_zero_rejected():
    with pytest.raises(ValueError):
        _scenario(speed_range=(0.0, 5.0))


def test_tracker_matches_position_at_with_monotone_and_random_queries():
    scn = _scenario(seed=7)
    tracker = PositionTracker(scn)
    for t_s in (0.0, 12.0, 40.5, 40.5, 300.0, 150.0, 599.0):
        t = s_to_us(t_s)
        for node in range(scn.n_nodes):
            assert tracker.position(node, t) == position_at(scn, node, t)


def test_scenario_file_roundtrip(tmp_path):
    scn = _scenario(seed=2, n_nodes=4)
    path = tmp_path / "mob.txt"
    write_scenario_file(scn, path)
    back = read_scenario_file(path, scn.area, scn.span_us)
    for node in range(4):
        for t_s in (0.0, 99.0, 250.0, 600.0):
            t = s_to_us(t_s)
            orig = position_at(scn, node, t)
            rt = position_at(back, node, t)
            assert math.dist(orig, rt) < 1e-3
