"""Discrete-event engine.

Events are ``(at_us, priority, seq, fn, args)`` tuples on a binary heap, so the
total order is time, then priority class, then insertion order.  At equal time
Data is handled before timers and timers before Interests; agent actions come
after packets and metric sampling comes last.
"""

from __future__ import annotations

import hashlib
import heapq
import zlib
from typing import Callable, Iterable, Optional

import numpy as np

from ..metrics import MetricsSeries
from ..names import US_PER_S, to_us


class TimeRegression(RuntimeError):
    """An event was scheduled before the current time."""


class Simulation:
    PRIO_DATA = 0
    PRIO_WAKE = 0
    PRIO_PROFILE = 0
    PRIO_TIMER = 1
    PRIO_INTEREST = 2
    PRIO_AGENT = 3
    PRIO_SAMPLE = 9

    def __init__(self, seed: int = 0, sample_interval_s: float = 0.1, trace: bool = False):
        if sample_interval_s <= 0:
            raise ValueError("sample interval must be positive")
        self.seed = int(seed)
        self.now = 0
        self.sample_interval_us = to_us(sample_interval_s)
        self._heap: list = []
        self._seq = 0
        self._nonce = 0
        self.events = 0
        self.end_us: Optional[int] = None
        self._trace = hashlib.blake2b(digest_size=16) if trace else None
        self.topology = None
        self.agents: list = []
        self.collector = None

    # ------------------------------------------------------------ queue
    def schedule(self, at: int, prio: int, fn: Callable, *args) -> None:
        if at < self.now:
            raise TimeRegression(f"event at {at} scheduled at time {self.now}")
        self._seq += 1
        heapq.heappush(self._heap, (at, prio, self._seq, fn, args))

    def after(self, delay_us: int, prio: int, fn: Callable, *args) -> None:
        self.schedule(self.now + int(delay_us), prio, fn, *args)

    def peek_time(self) -> float:
        return self._heap[0][0] if self._heap else float("inf")

    def __len__(self):
        return len(self._heap)

    # ------------------------------------------------------------ helpers
    def rng(self, component: str) -> np.random.Generator:
        """Generator for one named component.

        Streams are split from the master seed by a CRC32 of the component
        name, so adding a component never shifts the draws of another.
        """
        key = zlib.crc32(component.encode())
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(key,)))

    def next_nonce(self) -> int:
        self._nonce += 1
        return self._nonce

    def reserve_nonces(self, n: int) -> int:
        """Claim ``n`` consecutive nonces; returns the first."""
        first = self._nonce + 1
        self._nonce += n
        return first

    def collector_event(self, node: str, metric: str, value) -> None:
        if self.collector is not None:
            self.collector.event(node, metric, value)

    @property
    def trace_digest(self) -> Optional[str]:
        return self._trace.hexdigest() if self._trace is not None else None

    # ------------------------------------------------------------ main loop
    def run_until(self, end_us: int) -> None:
        heap = self._heap
        pop = heapq.heappop
        trace = self._trace
        n = 0
        while heap and heap[0][0] <= end_us:
            at, prio, _, fn, args = pop(heap)
            if at < self.now:
                raise TimeRegression(f"event at {at} popped after {self.now}")
            self.now = at
            if trace is not None:
                trace.update(b"%d %d %s\n" % (at, prio, getattr(fn, "__qualname__", "?").encode()))
            fn(*args)
            n += 1
        self.events += n
        if end_us > self.now:
            self.now = end_us

    def run(self, topology, agents: Iterable, duration_s: float,
            collect: bool = True) -> MetricsSeries:
        """Wire ``topology`` and ``agents`` to this engine and run for ``duration_s``."""
        from .metrics_hook import Collector

        if duration_s <= 0:
            raise ValueError("duration must be positive")
        self.agents = list(agents)
        series = MetricsSeries(self.sample_interval_us / US_PER_S, duration_s)
        self.end_us = end = to_us(duration_s)
        if not self.agents:
            return series
        topology.validate()
        self.topology = topology
        for link in topology.links:
            link.sim = self
        for node in topology.nodes.values():
            node.attach(self)
        if collect:
            self.collector = Collector(self, topology, series)
            self.collector.start()
        for r in topology.routers:
            for b in r.profile.boundaries():
                if b <= end:
                    self.schedule(b, self.PRIO_PROFILE, _profile_change, r, b)
        for agent in self.agents:
            agent.start()
        self.run_until(end)
        return series


def _profile_change(router, at: int) -> None:
    router.counters["profile_changes"] += 1


def set_cpu_profile(router, profile) -> None:
    """Give ``router`` a new speed profile; only valid before a run starts."""
    if router.sim is not None and router.sim.now > 0:
        raise RuntimeError("CPU profiles can only be changed before the run")
    for _, f in profile.segments:
        if not 0.0 < f <= 1.0:
            raise ValueError(f"CPU fraction {f} outside (0, 1]")
    router.profile = profile


def run(topology, agents: Iterable, duration_s: float, seed: int = 0,
        sample_interval_s: float = 0.1) -> MetricsSeries:
    """Run one simulation and return its metric series."""
    return Simulation(seed, sample_interval_s).run(topology, agents, duration_s)
