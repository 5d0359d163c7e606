import pytest

from manetsim.sim_core import (EventQueue, RngStream, RngStreams, SimFaultError,
                               s_to_us, us_to_s)


def test_time_conversion_roundtrip():
    assert s_to_us(600.0) == 600_000_000
    assert us_to_s(s_to_us(0.06)) == 0.06
    assert s_to_us(2.128e-3) == 2128


def test_dispatch_order_by_time():
    q = EventQueue()
    log = []
    q.schedule_at(s_to_us(5.0), lambda: log.append(5.0))
    q.schedule_at(s_to_us(3.0), lambda: log.append(3.0))
    q.run_until(s_to_us(10.0))
    assert log == [3.0, 5.0]


def test_equal_times_dispatch_in_schedule_order():
    q = EventQueue()
    log = []
    a = q.schedule_at(3_000_000, lambda: log.append("first"))
    b = q.schedule_at(3_000_000, lambda: log.append("second"))
    assert a.seq < b.seq
    q.run_until(3_000_000)
    assert log == ["first", "second"]


def test_cancelled_event_never_dispatches():
    q = EventQueue()
    log = []
    h = q.schedule_at(10, lambda: log.append("x"))
    h.cancel()
    q.run_until(100)
    assert log == []


def test_run_until_empty_queue_advances_clock():
    q = EventQueue()
    assert q.run_until(s_to_us(600.0)) == 0
    assert q.now_us == s_to_us(600.0)


def test_run_until_boundary_counts():
    q = EventQueue()
    for t in (100, 200, 599_999_999, 600_000_001):
        q.schedule_at(t, lambda: None)
    assert q.run_until(600_000_000) == 3
    assert q.now_us == 600_000_000


def test_scheduling_in_the_past_aborts():
    q = EventQueue()
    q.run_until(100)
    with pytest.raises(SimFaultError):
        q.schedule_at(50, lambda: None)


def test_clock_monotone_during_dispatch():
    q = EventQueue()
    seen = []
    for t in (40, 10, 30, 20):
        q.schedule_at(t, lambda: seen.append(q.now_us))
    q.run_until(50)
    assert seen == sorted(seen) == [10, 20, 30, 40]


def test_nested_scheduling_from_handler():
    q = EventQueue()
    log = []
    q.schedule_at(10, lambda: q.schedule(5, lambda: log.append(q.now_us)))
    q.run_until(100)
    assert log == [15]


def test_same_stream_same_seed_reproduces():
    a = RngStream(42, "mobility")
    b = RngStream(42, "mobility")
    assert [a.uniform(0, 1) for _ in range(50)] == [b.uniform(0, 1) for _ in range(50)]


def test_streams_with_different_labels_differ():
    a = RngStream(42, "mobility")
    b = RngStream(42, "traffic")
    assert [a.uniform(0, 1) for _ in range(10)] != [b.uniform(0, 1) for _ in range(10)]


def test_uniform_mean_statistics():
    s = RngStream(7, "stats")
    n = 10**6
    mean = sum(s.uniform(0.0, 1.0) for _ in range(n)) / n
    assert abs(mean - 0.5) < 0.01


def test_empty_ranges_rejected():
    s = RngStream(1, "x")
    with pytest.raises(ValueError):
        s.uniform(2.0, 2.0)
    with pytest.raises(ValueError):
        s.randint(5, 4)
    with pytest.raises(ValueError):
        s.choice([])


def test_stream_factory_caches_instances():
    streams = RngStreams(9)
    assert streams.stream("mac-backoff") is streams.stream("mac-backoff")
    first = streams.stream("mac-backoff").randint(0, 1000)
    again = RngStreams(9).stream("mac-backoff").randint(0, 1000)
    assert first == again
