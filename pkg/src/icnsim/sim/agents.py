"""End systems: consumers with their workloads, and the content repository.

Consumers re-issue every unanswered Interest at a fixed interval with a fresh
nonce.  Retransmissions due at the same instant share one timer event.
"""

from __future__ import annotations

import math
import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..names import (DEFAULT_CHUNK_SIZE, ContentName, DataPacket, Interest, US_PER_S,
                     name, name_prefix_match, to_us)

RETRANSMIT_INTERVAL_S = 1.0
INTEREST_LIFETIME_MS = 4000.0
DOWNLOAD_WINDOW = 64


class Endpoint:
    """A node without a CPU model: packets are handled on arrival."""

    kind = "endpoint"

    def __init__(self, node_id: str):
        self.id = node_id
        self.ports: dict = {}
        self.sim = None
        self.counters: Counter = Counter()

    def __repr__(self):
        return f"{type(self).__name__}({self.id})"

    def attach(self, sim) -> None:
        self.sim = sim

    def start(self) -> None:
        pass

    def receive(self, face, packet, size, sender_port=None) -> None:
        if isinstance(packet, Interest):
            self.on_interest(face, packet)
        else:
            self.on_data(face, packet)

    def on_interest(self, face, interest: Interest) -> None:
        pass

    def on_data(self, face, data: DataPacket) -> None:
        pass

    def sample(self) -> dict:
        """Cumulative counters exported every sampling tick."""
        return {}


# ----------------------------------------------------------------- workloads

@dataclass(frozen=True)
class FloodNonexistent:
    """Bursts of Interests for names nobody serves, kept alive by refreshes."""

    burst: int = 2000
    pause_s: float = 6.0
    total: int = 150_000
    prefix: str = "/repo/void"

    def __post_init__(self):
        if self.burst <= 0 or self.total < 0 or self.pause_s <= 0:
            raise ValueError("flood needs burst > 0, total >= 0, pause > 0")

    @property
    def bursts(self) -> int:
        return -(-self.total // self.burst)


@dataclass(frozen=True)
class BulkDownload:
    """Files requested at ``rate`` per second; each file pipelines its chunks.

    ``arrivals`` is ``"periodic"`` (one file every 1/rate s, first at 0) or
    ``"poisson"``.
    """

    files: int = 500
    rate: float = 100.0
    file_size: int = 1_250_000  # bytes (10 Mbit)
    window: int = DOWNLOAD_WINDOW
    chunk_size: int = DEFAULT_CHUNK_SIZE
    prefix: str = "/repo/files"
    arrivals: str = "periodic"

    def __post_init__(self):
        if self.files < 0 or self.rate <= 0 or self.file_size <= 0:
            raise ValueError("download needs files >= 0, rate > 0, file_size > 0")
        if self.arrivals not in ("periodic", "poisson"):
            raise ValueError(f"unknown arrival mode {self.arrivals!r}")
        if self.window < 1 or self.chunk_size < 1:
            raise ValueError("window and chunk_size must be >= 1")

    @property
    def chunks_per_file(self) -> int:
        return -(-self.file_size // self.chunk_size)


@dataclass(frozen=True)
class PoissonRequests:
    """Single-chunk requests at rate ``alpha``; unique names unless ``catalog`` is set."""

    alpha: float = 0.0
    catalog: Optional[int] = None
    prefix: str = "/repo/files"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.catalog is not None and self.catalog < 1:
            raise ValueError("catalog must be >= 1")


Workload = Union[FloodNonexistent, BulkDownload, PoissonRequests, None]


def consumer_behavior(kind: str, node_id: str = "consumer", **params) -> "Consumer":
    """Build a consumer by workload name: ``flood``, ``bulk`` or ``poisson``."""
    kinds = {"flood": FloodNonexistent, "bulk": BulkDownload, "poisson": PoissonRequests}
    if kind not in kinds:
        raise ValueError(f"unknown consumer kind {kind!r}")
    return Consumer(node_id, kinds[kind](**params))


class Consumer(Endpoint):
    kind = "consumer"

    def __init__(self, node_id: str, workload: Workload = None, *,
                 retransmit_s: float = RETRANSMIT_INTERVAL_S,
                 lifetime_ms: float = INTEREST_LIFETIME_MS,
                 start_s: float = 0.0, stop_s: Optional[float] = None,
                 face: int = 0, keep_log: bool = False, jitter: float = 0.0):
        super().__init__(node_id)
        if retransmit_s <= 0:
            raise ValueError("retransmit interval must be positive")
        if not 0.0 <= jitter < 1.0:
            raise ValueError("jitter must be in [0, 1)")
        self.workload = workload
        self.retransmit_us = to_us(retransmit_s)
        #: each batch waits retransmit_s * (1 +- jitter), whole milliseconds
        self.jitter = jitter
        self.lifetime_ms = lifetime_ms
        self.start_us = to_us(start_s)
        self.stop_us = to_us(stop_s) if stop_s is not None else None
        self.face = face
        # name -> file index (or -1)
        self.pending: dict[ContentName, int] = {}
        self._due: dict[int, list[ContentName]] = {}
        self.goodput_bits = 0
        self.request_log: Optional[list[ContentName]] = [] if keep_log else None
        self._digest = 0
        self._files: dict[int, list] = {}
        self.rng: Optional[np.random.Generator] = None

    # --------------------------------------------------------- sending
    def _active(self) -> bool:
        return self.stop_us is None or self.sim.now < self.stop_us

    def request(self, nm: ContentName, tag: int = -1) -> None:
        """Ask for ``nm`` until Data arrives (or the consumer stops)."""
        self.request_many((nm,), tag)

    def request_many(self, names, tag: int = -1) -> None:
        pending = self.pending
        fresh = [nm for nm in names if nm not in pending]
        for nm in fresh:
            pending[nm] = tag
        self.counters["requests"] += len(fresh)
        if self.request_log is not None:
            self.request_log.extend(fresh)
            for nm in fresh:
                self._digest = (self._digest + zlib.crc32(nm.wire)) & 0xFFFFFFFF
        self._send(fresh)

    def _send(self, names: list) -> None:
        if not names:
            return
        sim = self.sim
        now = sim.now
        first = sim.reserve_nonces(len(names))
        lifetime = self.lifetime_ms
        packets = [Interest(nm, first + i, lifetime, now) for i, nm in enumerate(names)]
        self.counters["interests_sent"] += len(packets)
        port = self.ports[self.face]
        if len(packets) == 1:
            port.send(packets[0], now)
        else:
            port.send_many(packets, now)
        wait = self.retransmit_us
        if self.jitter:
            wait *= 1.0 + self.jitter * (2.0 * self.rng.random() - 1.0)
            wait = max(1000, int(round(wait / 1000.0)) * 1000)
        due = now + wait
        cohort = self._due.get(due)
        if cohort is None:
            self._due[due] = list(names)
            sim.schedule(due, sim.PRIO_AGENT, self._retransmit, due)
        else:
            cohort.extend(names)

    def _retransmit(self, due: int) -> None:
        names = self._due.pop(due)
        if not self._active():
            return
        pending = self.pending
        again = [nm for nm in names if nm in pending]
        self.counters["retransmits"] += len(again)
        self._send(again)

    # --------------------------------------------------------- receiving
    def on_data(self, face, data: DataPacket) -> None:
        tag = self.pending.pop(data.name, None)
        if tag is None:
            self.counters["duplicates"] += 1
            return
        self.counters["delivered"] += 1
        self.goodput_bits += data.payload_size * 8
        if tag >= 0:
            self._chunk_done(tag)

    def sample(self) -> dict:
        c = self.counters
        out = {"goodput_bits": self.goodput_bits, "data_received": c["delivered"],
               "interests_sent": c["interests_sent"], "consumer_retransmits": c["retransmits"],
               "requests": c["requests"], "pending": len(self.pending)}
        if self.request_log is not None:
            # names are unique per request, so the log is its own set
            out["request_log_count"] = len(self.request_log)
            out["request_log_digest"] = self._digest
        return out

    # --------------------------------------------------------- workloads
    def start(self) -> None:
        self.rng = self.sim.rng(f"consumer/{self.id}")
        w = self.workload
        if w is None:
            return
        sim = self.sim
        if isinstance(w, FloodNonexistent):
            for k in range(w.bursts):
                sim.schedule(self.start_us + to_us(k * w.pause_s), sim.PRIO_AGENT, self._burst, k)
        elif isinstance(w, BulkDownload):
            t = self.start_us
            for i in range(w.files):
                if w.arrivals == "periodic":
                    t = self.start_us + to_us(i / w.rate)
                else:
                    t += max(1, int(round(self.rng.exponential(1.0 / w.rate) * US_PER_S)))
                sim.schedule(t, sim.PRIO_AGENT, self._start_file, i)
        elif isinstance(w, PoissonRequests):
            if w.alpha > 0:
                self._next_poisson(self.start_us)

    def _burst(self, k: int) -> None:
        if not self._active():
            return
        w = self.workload
        base = name(w.prefix).child(self.id)
        lo = k * w.burst
        comps = base.components
        self.request_many([ContentName(comps + (b"%d" % i,), 0) for i in range(lo, min(lo + w.burst, w.total))])

    def _next_poisson(self, t: int) -> None:
        gap = max(1, int(round(self.rng.exponential(1.0 / self.workload.alpha) * US_PER_S)))
        at = t + gap
        if self.stop_us is not None and at >= self.stop_us:
            return
        self.sim.schedule(at, self.sim.PRIO_AGENT, self._poisson_request)

    def _poisson_request(self) -> None:
        w = self.workload
        k = int(self.rng.integers(w.catalog)) if w.catalog else self.counters["poisson"]
        self.counters["poisson"] += 1
        self.request(name(w.prefix).child(self.id).child(f"p{k}").with_chunk(0))
        self._next_poisson(self.sim.now)

    def _start_file(self, i: int) -> None:
        if not self._active():
            return
        w = self.workload
        base = name(w.prefix).child(self.id).child(f"f{i}")
        # [base, next chunk to request, chunks received]
        self._files[i] = [base, 0, 0]
        self.sim.collector_event(self.id, "file_start", i)
        for _ in range(min(w.window, w.chunks_per_file)):
            self._next_chunk(i)

    def _next_chunk(self, i: int) -> None:
        st = self._files[i]
        chunk = st[1]
        st[1] += 1
        self.request(ContentName(st[0].components, chunk), i)

    def _chunk_done(self, i: int) -> None:
        w = self.workload
        st = self._files[i]
        st[2] += 1
        if st[2] == w.chunks_per_file:
            self.sim.collector_event(self.id, "file_stop", i)
            del self._files[i]
        elif st[1] < w.chunks_per_file:
            self._next_chunk(i)


# ---------------------------------------------------------------- repository

DelaySpec = Union[int, Callable[[np.random.Generator], float], None]


class Repository(Endpoint):
    """Answers Interests for names under ``content`` prefixes after a delay.

    ``delay_us`` is a fixed latency or a callable drawing one from the
    repository's generator.  ``service_us`` adds a FIFO per-request service
    time.
    """

    kind = "repository"

    def __init__(self, node_id: str = "repository",
                 content: Sequence[Union[str, ContentName]] = ("/repo/files",),
                 payload_size: int = DEFAULT_CHUNK_SIZE,
                 delay_us: DelaySpec = 0, service_us: float = 0, face: int = 0,
                 dedup: bool = False):
        super().__init__(node_id)
        self.content = [name(c) for c in content]
        self.payload_size = payload_size
        self.delay_us = delay_us
        self.service_us = service_us
        self.face = face
        self.busy_until = 0.0
        #: ignore requests for a chunk that is still waiting to be served
        self.dedup = dedup
        self._queued: set = set()
        self.rng: Optional[np.random.Generator] = None

    def attach(self, sim) -> None:
        super().attach(sim)
        self.rng = sim.rng(f"repository/{self.id}")

    def serves(self, nm: ContentName) -> bool:
        return nm.chunk is not None and any(name_prefix_match(nm, p) for p in self.content)

    def on_interest(self, face, interest: Interest) -> None:
        self.counters["interests"] += 1
        nm = interest.name
        if not self.serves(nm):
            self.counters["unknown"] += 1
            return
        sim = self.sim
        if self.dedup:
            key = (face, nm)
            if key in self._queued:
                self.counters["suppressed"] += 1
                return
            self._queued.add(key)
        start = max(sim.now, self.busy_until)
        done = start + self.service_us
        self.busy_until = done
        d = self.delay_us
        if callable(d):
            d = max(0, int(round(d(self.rng))))
        at = math.ceil(done + (d or 0))
        if at == sim.now:
            self._answer(face, nm)
        else:
            sim.schedule(at, sim.PRIO_AGENT, self._answer, face, nm)

    def _answer(self, face, nm: ContentName) -> None:
        if self.dedup:
            self._queued.discard((face, nm))
        self.counters["data_sent"] += 1
        self.ports[face].send(DataPacket(nm, self.payload_size), self.sim.now)

    def sample(self) -> dict:
        return {"repo_interests": self.counters["interests"], "repo_data_sent": self.counters["data_sent"]}


def gamma_delay(mean_us: float, std_us: float, offset_us: float = 0.0) -> Callable[[np.random.Generator], float]:
    """Sampler of Gamma-distributed delays with the given mean and deviation."""
    if mean_us <= 0 or std_us <= 0:
        raise ValueError("mean and std must be positive")
    shape = (mean_us / std_us) ** 2
    scale = std_us ** 2 / mean_us

    def draw(rng: np.random.Generator) -> float:
        return offset_us + rng.gamma(shape, scale)

    return draw
