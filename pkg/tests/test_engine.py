import math

import pytest

from icnsim.names import DataPacket, Interest, name
from icnsim.router import CpuProfile, RouterConfig
from icnsim.sim import Consumer, Repository, Simulation, build_chain
from icnsim.sim.agents import BulkDownload, Endpoint, PoissonRequests
from icnsim.sim.engine import TimeRegression, set_cpu_profile
from icnsim.sim.links import Link, LinkKind
from icnsim.sim.topology import LinkSpec, Topology


class Sink(Endpoint):
    def __init__(self, node_id):
        super().__init__(node_id)
        self.got = []

    def receive(self, face, packet, size, sender_port=None):
        self.got.append((self.sim.now, packet))


# -------------------------------------------------------------- ordering

def test_events_ordered_by_time_priority_then_insertion():
    sim = Simulation()
    seen = []
    sim.schedule(10, sim.PRIO_INTEREST, seen.append, "interest")
    sim.schedule(10, sim.PRIO_DATA, seen.append, "data")
    sim.schedule(10, sim.PRIO_TIMER, seen.append, "timer")
    sim.schedule(5, sim.PRIO_SAMPLE, seen.append, "early")
    sim.schedule(10, sim.PRIO_DATA, seen.append, "data2")
    sim.run_until(20)
    assert seen == ["early", "data", "data2", "timer", "interest"]
    assert sim.now == 20


def test_scheduling_in_the_past_is_refused():
    sim = Simulation()
    sim.run_until(100)
    with pytest.raises(TimeRegression):
        sim.schedule(50, 0, print)


def test_component_streams_are_independent():
    a, b = Simulation(7), Simulation(7)
    first = a.rng("consumer/x").random(3)
    b.rng("something/else").random(100)
    assert (b.rng("consumer/x").random(3) == first).all()
    assert not (Simulation(8).rng("consumer/x").random(3) == first).all()


# --------------------------------------------------------------- links

def _pair(capacity=1e6, prop=500, kind=LinkKind.POINT_TO_POINT, members=2):
    sim = Simulation()
    sinks = [Sink(f"n{i}") for i in range(members)]
    link = Link("l", capacity, prop, kind)
    ports = [link.connect(s, 0) for s in sinks]
    for s in sinks:
        s.ports[0] = ports[sinks.index(s)]
        s.attach(sim)
    link.sim = sim
    return sim, sinks, ports


def test_serialization_plus_propagation():
    sim, (a, b), (pa, _) = _pair(capacity=1e6, prop=500)
    d = DataPacket(name("/x#0"), 932)  # 64 header + 4 name + 932 = 1000 bytes
    pa.send(d, 0)
    pa.send(d, 0)
    sim.run_until(10 ** 6)
    # 8000 bits at 1 Mbit/s = 8 ms each, back to back
    assert [t for t, _ in b.got] == [8500, 16500]
    assert a.got == []
    assert pa.tx.bits_until(4000) == pytest.approx(4000)
    assert pa.tx.bits_until(20000) == 16000


def test_train_matches_single_sends():
    sim1, (_, b1), (p1, _) = _pair()
    sim2, (_, b2), (p2, _) = _pair()
    pkts = [Interest(name(f"/x/{i}#0"), i) for i in range(5)]
    for p in pkts:
        p1.send(p, 100)
    p2.send_many(pkts, 100)
    sim1.run_until(10 ** 6)
    sim2.run_until(10 ** 6)
    assert [t for t, _ in b1.got] == [t for t, _ in b2.got]


def test_shared_link_broadcasts_to_all_others():
    sim, sinks, ports = _pair(kind=LinkKind.SHARED_BROADCAST, members=3)
    ports[0].send(Interest(name("/x#0"), 1), 0)
    ports[1].send(Interest(name("/y#0"), 2), 0)
    sim.run_until(10 ** 6)
    assert [str(p.name) for _, p in sinks[2].got] == ["/x#0", "/y#0"]
    assert [str(p.name) for _, p in sinks[0].got] == ["/y#0"]
    # one transmitter for the whole medium: the second frame waits for the first
    t_x, t_y = sinks[2].got[0][0], sinks[2].got[1][0]
    size = Interest(name("/x#0"), 1).wire_size
    assert t_y - t_x == math.ceil(size * 8 / 1e6 * 1e6)


def test_point_to_point_has_two_ends():
    link = Link("l", 1e6)
    link.connect(Sink("a"), 0)
    link.connect(Sink("b"), 0)
    with pytest.raises(ValueError):
        link.connect(Sink("c"), 0)


def test_topology_validation():
    topo = Topology()
    a, b = Sink("a"), Sink("b")
    topo.add_node(a)
    topo.add_node(b)
    with pytest.raises(ValueError):
        topo.validate()
    topo.connect(a, 0, b, 0, LinkSpec(1e6, 0))
    topo.validate()
    with pytest.raises(ValueError):
        topo.add_node(Sink("a"))
    with pytest.raises(ValueError):
        topo.connect(a, 0, b, 1)


# ----------------------------------------------------------- integration

def test_single_request_round_trip_time():
    consumer = Consumer("consumer")
    repo = Repository(delay_us=5000)
    cfg = RouterConfig(cpu_hz=1e12)
    topo = build_chain(2, 1e12, cfg, consumer=consumer, repository=repo, propagation_us=1000)
    sim = Simulation(1)
    sim.run(topo, [consumer], 1.0)
    consumer.request(name("/repo/files/a#0"))
    sim.run_until(sim.now + 100_000)
    assert consumer.counters["delivered"] == 1
    assert all(len(r.pit) == 0 for r in topo.hops())


def test_download_completes_and_is_deterministic():
    def once():
        c = Consumer("consumer", BulkDownload(files=2, rate=10, file_size=40_000, window=4))
        topo = build_chain(2, 10e6, RouterConfig(cpu_hz=1e9), consumer=c, repository=Repository(delay_us=1000))
        series = Simulation(3).run(topo, [c], 3.0)
        return c, series

    c, series = once()
    assert len(series.files("consumer")) == 2
    assert c.counters["delivered"] == 2 * 10 and not c.pending
    _, again = once()
    assert series.rows("pit") == again.rows("pit")


def test_unanswered_interest_is_retransmitted():
    c = Consumer("consumer", retransmit_s=1.0)
    topo = build_chain(1, 1e9, RouterConfig(cpu_hz=1e12), consumer=c, repository=Repository(content=["/none"]))
    sim = Simulation(1)
    sim.run(topo, [c], 0.001)
    c.request(name("/repo/files/a#0"))
    sim.run_until(3_500_000)
    assert c.counters["retransmits"] == 3
    assert topo.nodes["R1"].counters["retransmits"] == 3


def test_cpu_profile_only_before_run():
    c = Consumer("consumer", PoissonRequests(10))
    topo = build_chain(1, consumer=c)
    r = topo.hops()[0]
    set_cpu_profile(r, CpuProfile.constant(0.5))
    sim = Simulation()
    sim.run(topo, [c], 0.5)
    with pytest.raises(RuntimeError):
        set_cpu_profile(r, CpuProfile.constant(1.0))
