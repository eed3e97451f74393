"""Periodic sampling of node and link state into a :class:`MetricsSeries`."""

from __future__ import annotations

from ..metrics import MetricsSeries
from ..router import DropReason, Router


class Collector:
    """Samples every router, endpoint and link direction once per interval.

    Rows for the interval ``(t - dt, t]`` are stamped ``t``.  Counters are
    cumulative; ``cpu_utilization``, ``link_bits`` and ``goodput_bits`` are
    per interval.
    """

    def __init__(self, sim, topology, series: MetricsSeries):
        self.sim = sim
        self.topology = topology
        self.series = series
        self.dt = sim.sample_interval_us
        routers, endpoints = [], []
        for node in topology.nodes.values():
            (routers if isinstance(node, Router) else endpoints).append(node)
        self.routers = routers
        self.endpoints = endpoints
        self._busy = {r.id: 0.0 for r in routers}
        self._goodput = {e.id: 0 for e in endpoints}
        # one meter per transmit queue; a shared link has a single queue
        self.meters = []
        seen = set()
        for link in topology.links:
            for port in link.ports:
                if id(port.tx) in seen:
                    continue
                seen.add(id(port.tx))
                self.meters.append([link.direction_name(port), port.tx, 0.0])

    def start(self) -> None:
        if self.dt <= self.sim.end_us:
            self.sim.schedule(self.dt, self.sim.PRIO_SAMPLE, self.tick)

    def tick(self) -> None:
        sim = self.sim
        t = sim.now
        rec = self.series.record
        dt = self.dt
        for r in self.routers:
            c = r.counters
            busy = r.busy_time(t)
            util = (busy - self._busy[r.id]) / dt
            self._busy[r.id] = busy
            rec(t, r.id, "pit_size", len(r.pit))
            rec(t, r.id, "backlog", r.backlog)
            rec(t, r.id, "pit_integral", r.pit_integral(t))
            rec(t, r.id, "interest_retransmits", c["retransmits"])
            rec(t, r.id, "cpu_utilization", min(1.0, util))
            rec(t, r.id, "cpu_fraction", r.profile.fraction_at(t))
            rec(t, r.id, "memory_bytes", r.memory_bytes(t))
            rec(t, r.id, "pit_expiries", r.expired_total)
            rec(t, r.id, "interests_in", c["interests_in"])
            rec(t, r.id, "data_in", c["data_in"])
            for reason in DropReason:
                rec(t, r.id, f"drops_{reason.value}", r.drops[reason])
        for e in self.endpoints:
            for metric, value in e.sample().items():
                if metric == "goodput_bits":
                    rec(t, e.id, metric, value - self._goodput[e.id])
                    self._goodput[e.id] = value
                else:
                    rec(t, e.id, metric, value)
        for meter in self.meters:
            bits = meter[1].bits_until(t)
            rec(t, meter[0], "link_bits", int(round(bits)) - int(round(meter[2])))
            meter[2] = bits
        nxt = t + dt
        if nxt <= sim.end_us:
            sim.schedule(nxt, sim.PRIO_SAMPLE, self.tick)

    def event(self, node: str, metric: str, value) -> None:
        self.series.record(self.sim.now, node, metric, value)
