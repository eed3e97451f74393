"""Per-node forwarding: Interest/Data pipelines, soft-state timers, CPU budget.

A :class:`Router` is both a pure state machine (``on_interest``, ``on_data``,
``on_timer``) and a simulation node: packets queue FIFO in front of a single
CPU whose speed follows a piecewise-constant :class:`CpuProfile`.  PIT work is
done when a packet starts service; the resulting emissions leave at the
service completion time.
"""

from __future__ import annotations

import bisect
import enum
import math
from collections import Counter, OrderedDict, deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .names import ContentName, DataPacket, FaceId, Interest, SimTime, US_PER_S
from .pit import BASE_COST, Outcome, PitEntry, PitSpec, PitStore, make_pit

PIPELINE_CYCLES = 1000
PIT_ENTRY_BYTES = 120
DEFAULT_TIMEOUT_S = 4.0


class DropReason(enum.Enum):
    RATE_LIMITED = "rate_limited"
    PIT_FULL = "pit_full"
    NO_ROUTE = "no_route"
    UNSOLICITED = "unsolicited"
    OVERLOAD = "overload"        # CPU backlog cap reached
    MEMORY_FULL = "memory_full"  # mem_limit reached


class ForwardInterest(NamedTuple):
    face: FaceId
    interest: Interest


class SendData(NamedTuple):
    face: FaceId
    data: DataPacket


class Drop(NamedTuple):
    reason: DropReason
    name: ContentName


Emission = Union[ForwardInterest, SendData, Drop]


# --------------------------------------------------------------------- FIB

class Origin(NamedTuple):
    kind: str = "static"          # "static" or "announced"
    agent: Optional[str] = None

    @classmethod
    def announced(cls, agent: str) -> "Origin":
        return cls("announced", agent)


STATIC = Origin()


@dataclass
class FibEntry:
    prefix: ContentName
    next_hops: list[FaceId]
    origin: Origin = STATIC

    def __post_init__(self):
        if not self.next_hops:
            raise ValueError("FIB entry needs a next hop")


class Fib:
    """Name-prefix table; longest match wins, first listed next hop is used."""

    def __init__(self):
        self._by_prefix: dict[tuple[bytes, ...], FibEntry] = {}
        self._depths: list[int] = []
        # name components -> matched entry; cleared on every table change
        self._memo: dict = {}

    def __len__(self):
        return len(self._by_prefix)

    def entries(self) -> list[FibEntry]:
        return list(self._by_prefix.values())

    def add(self, prefix: ContentName, face: FaceId, origin: Origin = STATIC, *, front: bool = False) -> FibEntry:
        key = prefix.components
        self._memo.clear()
        entry = self._by_prefix.get(key)
        if entry is None:
            entry = self._by_prefix[key] = FibEntry(ContentName(key), [face], origin)
            if len(key) not in self._depths:
                bisect.insort(self._depths, len(key))
            return entry
        if face in entry.next_hops:
            entry.next_hops.remove(face)
        if front:
            entry.next_hops.insert(0, face)
            entry.origin = origin
        else:
            entry.next_hops.append(face)
        return entry

    def withdraw(self, prefix: ContentName, face: FaceId) -> None:
        entry = self._by_prefix.get(prefix.components)
        if entry is None or face not in entry.next_hops:
            return
        self._memo.clear()
        entry.next_hops.remove(face)
        if not entry.next_hops:
            del self._by_prefix[prefix.components]
            depth = len(prefix.components)
            if not any(len(k) == depth for k in self._by_prefix):
                self._depths.remove(depth)

    def longest_match(self, name: ContentName) -> Optional[FibEntry]:
        comps = name.components
        memo = self._memo
        if comps in memo:
            return memo[comps]
        table = self._by_prefix
        found = None
        for depth in reversed(self._depths):
            if depth <= len(comps):
                entry = table.get(comps[:depth])
                if entry is not None:
                    found = entry
                    break
        if len(memo) > 65536:
            memo.clear()
        memo[comps] = found
        return found


# ------------------------------------------------------------ content store

class ContentStore:
    """LRU cache of Data names; capacity 0 disables it."""

    def __init__(self, capacity: int = 0):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self._entries: OrderedDict[ContentName, int] = OrderedDict()
        self.hits = 0

    def __len__(self):
        return len(self._entries)

    def __contains__(self, name):
        return name in self._entries

    def get(self, name: ContentName) -> Optional[int]:
        size = self._entries.get(name)
        if size is not None:
            self._entries.move_to_end(name)
            self.hits += 1
        return size

    def put(self, name: ContentName, payload_size: int) -> None:
        if self.capacity == 0:
            return
        self._entries[name] = payload_size
        self._entries.move_to_end(name)
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)


# ------------------------------------------------------------ rate limiting

class RateScope(enum.Enum):
    PER_FACE = "per-face"
    PER_FACE_PREFIX = "per-face-prefix"


@dataclass(frozen=True)
class RateLimit:
    max_rate: float
    scope: RateScope = RateScope.PER_FACE
    burst: Optional[float] = None  # defaults to one second worth of tokens

    def __post_init__(self):
        if self.max_rate <= 0:
            raise ValueError("max_rate must be positive")


class TokenBucketLimiter:
    def __init__(self, limit: RateLimit):
        self.limit = limit
        self.capacity = limit.burst if limit.burst is not None else limit.max_rate
        self._buckets: dict[object, list[float]] = {}
        self.throttled = 0

    def key(self, face: FaceId, name: ContentName):
        if self.limit.scope is RateScope.PER_FACE:
            return face
        return face, name.components[0]

    def check(self, face: FaceId, name: ContentName, now: SimTime) -> bool:
        key = self.key(face, name)
        bucket = self._buckets.get(key)
        if bucket is None:
            bucket = self._buckets[key] = [self.capacity, now]
        tokens, last = bucket
        tokens = min(self.capacity, tokens + (now - last) * self.limit.max_rate / US_PER_S)
        bucket[1] = now
        if tokens >= 1.0:
            bucket[0] = tokens - 1.0
            return True
        bucket[0] = tokens
        self.throttled += 1
        return False


# --------------------------------------------------------------- CPU model

class CpuProfile:
    """Piecewise-constant fraction of the nominal CPU speed over time.

    ``segments`` is a list of ``(start_us, fraction)`` pairs; the first segment
    must start at 0 and the last one holds forever.
    """

    def __init__(self, segments: Sequence[tuple[int, float]] = ((0, 1.0),)):
        segs = sorted((int(t), float(f)) for t, f in segments)
        if not segs or segs[0][0] != 0:
            raise ValueError("profile must start at time 0")
        for _, f in segs:
            if not 0.0 < f <= 1.0:
                raise ValueError(f"CPU fraction {f} outside (0, 1]")
        # merge runs of equal fraction so a flat profile has no boundaries
        segs = [s for i, s in enumerate(segs) if i == 0 or s[1] != segs[i - 1][1]]
        self.segments = segs
        self._starts = [t for t, _ in segs]
        self._idx = 0

    @classmethod
    def constant(cls, fraction: float = 1.0) -> "CpuProfile":
        return cls([(0, fraction)])

    @classmethod
    def square_wave(cls, low: float, low_s: float, high_s: float, offset_s: float = 0.0,
                    horizon_s: float = 3600.0, high: float = 1.0) -> "CpuProfile":
        """Alternate ``low`` for ``low_s`` seconds and ``high`` for ``high_s``.

        Low phases start at ``offset_s + k * (low_s + high_s)`` for every integer k.
        """
        period = low_s + high_s
        phase = (-offset_s) % period
        if phase < low_s:
            segs, t, is_low = [(0, low)], low_s - phase, True
        else:
            segs, t, is_low = [(0, high)], period - phase, False
        while t < horizon_s:
            is_low = not is_low
            segs.append((int(round(t * US_PER_S)), low if is_low else high))
            t += low_s if is_low else high_s
        return cls(segs)

    def boundaries(self) -> list[int]:
        return self._starts[1:]

    def _seg(self, t: float) -> int:
        i = self._idx
        starts = self._starts
        if starts[i] <= t and (i + 1 == len(starts) or t < starts[i + 1]):
            return i
        i = bisect.bisect_right(starts, t) - 1
        self._idx = i
        return i

    def fraction_at(self, t: float) -> float:
        return self.segments[self._seg(t)][1]

    def finish(self, start: float, cycles: float, hz: float) -> float:
        """Time (µs, fractional) at which ``cycles`` started at ``start`` finish."""
        if cycles <= 0:
            return start
        i = self._seg(start)
        segs = self.segments
        per_us = hz / US_PER_S
        t = start
        while True:
            frac = segs[i][1]
            rate = per_us * frac
            if i + 1 == len(segs):
                return t + cycles / rate
            seg_end = segs[i + 1][0]
            room = (seg_end - t) * rate
            if room >= cycles:
                return t + cycles / rate
            cycles -= room
            t = seg_end
            i += 1


# ------------------------------------------------------------ configuration

@dataclass
class RouterConfig:
    cpu_hz: float = 2.4e9
    mem_limit: int = 3 * 2 ** 30
    pit: PitSpec = field(default_factory=PitSpec)
    pit_entry_bytes: int = PIT_ENTRY_BYTES
    interest_timeout_s: float = DEFAULT_TIMEOUT_S
    rate_limit: Optional[RateLimit] = None
    cs_capacity: int = 0
    base_cost: int = BASE_COST
    pipeline_cycles: int = PIPELINE_CYCLES
    #: extra cycles per wire byte of every handled packet (copying, checksums)
    per_byte_cycles: float = 0.0
    #: re-forward Interests that refresh a pending entry from the same face
    forward_refreshes: bool = False
    #: max packets waiting for the CPU; None = unbounded (memory-accounted)
    backlog_cap: Optional[int] = None
    #: if set, arrivals beyond this many waiting packets stay parked at the
    #: sender (reliable hop-by-hop transport) instead of being dropped
    rx_window: Optional[int] = None

    def __post_init__(self):
        if self.cpu_hz <= 0:
            raise ValueError("cpu_hz must be positive")
        if self.interest_timeout_s <= 0:
            raise ValueError("interest_timeout_s must be positive")
        if self.pit.capacity * self.pit_entry_bytes > self.mem_limit:
            raise ValueError("PIT capacity does not fit into mem_limit")
        if self.pipeline_cycles < 0 or self.per_byte_cycles < 0:
            raise ValueError("cycle costs must be >= 0")
        if self.backlog_cap is not None and self.backlog_cap < 0:
            raise ValueError("backlog_cap must be >= 0")
        if self.rx_window is not None and self.rx_window < 1:
            raise ValueError("rx_window must be >= 1")

    @property
    def timeout_us(self) -> int:
        return int(round(self.interest_timeout_s * US_PER_S))


# ------------------------------------------------------------------ router

class Router:
    kind = "router"

    def __init__(self, node_id: str, config: Optional[RouterConfig] = None,
                 rng: Optional[np.random.Generator] = None, profile: Optional[CpuProfile] = None):
        self.id = node_id
        self.config = config = config or RouterConfig()
        self.pit: PitStore = make_pit(config.pit, rng, config.base_cost)
        self.fib = Fib()
        self.cs = ContentStore(config.cs_capacity)
        self.limiter = TokenBucketLimiter(config.rate_limit) if config.rate_limit else None
        self.profile = profile or CpuProfile()
        self._timeout_us = config.timeout_us
        self._per_us = config.cpu_hz / US_PER_S
        # integral of PIT size over time (entries * µs) up to _area_t
        self._area = 0.0
        self._area_t = 0
        self.busy_until = 0.0
        self.busy_accum = 0.0
        self.last_cycles = 0
        self.ports: dict = {}
        self.sim = None
        # FIFO in front of the CPU: (face, packet, size)
        self.queue: deque = deque()
        self.queue_bytes = 0
        self.held: deque = deque()
        self._wake_at: Optional[int] = None
        self._timer_at: Optional[int] = None
        self.counters: Counter = Counter()
        self.drops: Counter = Counter()
        self.expired_total = 0

    def __repr__(self):
        return f"Router({self.id})"

    # -------------------------------------------------------- pure pipeline
    def rate_limiter_check(self, face: FaceId, name: ContentName, now: SimTime) -> bool:
        if self.limiter is None:
            return True
        return self.limiter.check(face, name, now)

    def _route(self, name: ContentName, in_face: FaceId) -> Optional[FaceId]:
        entry = self.fib.longest_match(name)
        if entry is None:
            return None
        for f in entry.next_hops:
            if f != in_face:
                return f
        return None

    def on_interest(self, face: FaceId, interest: Interest, now: SimTime) -> list[Emission]:
        cfg = self.config
        nm = interest.name
        self.counters["interests_in"] += 1
        cycles = cfg.pipeline_cycles
        if cfg.per_byte_cycles:
            cycles += cfg.per_byte_cycles * interest.wire_size
        self.last_cycles = cycles
        if self.limiter is not None and not self.limiter.check(face, nm, now):
            self.drops[DropReason.RATE_LIMITED] += 1
            return [Drop(DropReason.RATE_LIMITED, nm)]
        if cfg.cs_capacity:
            size = self.cs.get(nm)
            if size is not None:
                self.counters["cs_hits"] += 1
                return [SendData(face, DataPacket(nm, size))]
        up = self._route(nm, face)
        if up is None:
            self.drops[DropReason.NO_ROUTE] += 1
            return [Drop(DropReason.NO_ROUTE, nm)]
        lifetime = interest.lifetime_us
        if lifetime > self._timeout_us:
            lifetime = self._timeout_us
        res = self.pit.offer(nm, (face,), now + lifetime, now)
        self.last_cycles = cycles + res.cost
        outcome = res.outcome
        if outcome is Outcome.AGGREGATED:
            if res.refreshed:
                self.counters["retransmits"] += 1
                if cfg.forward_refreshes:
                    return [ForwardInterest(up, interest)]
            else:
                self.counters["aggregated"] += 1
            return []
        if outcome is Outcome.REJECTED_FULL:
            self.drops[DropReason.PIT_FULL] += 1
            return [Drop(DropReason.PIT_FULL, nm)]
        if outcome is Outcome.OVERWROTE:
            self.counters["overwrites"] += 1
        self._arm_timer(now + lifetime)
        return [ForwardInterest(up, interest)]

    def on_data(self, face: FaceId, data: DataPacket, now: SimTime) -> list[Emission]:
        cfg = self.config
        nm = data.name
        self.counters["data_in"] += 1
        entry, cost = self.pit.lookup(nm, now)
        cycles = cfg.pipeline_cycles + cost
        if cfg.per_byte_cycles:
            cycles += cfg.per_byte_cycles * data.wire_size
        if entry is None:
            self.last_cycles = cycles
            self.drops[DropReason.UNSOLICITED] += 1
            return [Drop(DropReason.UNSOLICITED, nm)]
        _, cost = self.pit.remove(nm)
        self.last_cycles = cycles + cost
        if cfg.cs_capacity:
            self.cs.put(nm, data.payload_size)
        out = [SendData(f, data) for f in sorted(entry.downstream_faces) if f != face]
        self.counters["data_out"] += len(out)
        return out

    def on_timer(self, now: SimTime) -> list[PitEntry]:
        expired, cost = self.pit.expire(now)
        self.last_cycles = cost
        self.expired_total += len(expired)
        return expired

    def schedule_processing(self, arrival: float, op_cycles: float) -> float:
        """Occupy the CPU for ``op_cycles`` no earlier than ``arrival``.

        Returns the (fractional µs) completion time and advances ``busy_until``.
        """
        start = arrival if arrival > self.busy_until else self.busy_until
        if len(self.profile.segments) == 1:
            end = start + op_cycles / (self._per_us * self.profile.segments[0][1])
        else:
            end = self.profile.finish(start, op_cycles, self.config.cpu_hz)
        self.busy_accum += end - start
        self.busy_until = end
        return end

    def fib_announce(self, prefix: ContentName, face: FaceId, origin: Origin = STATIC) -> Fib:
        self.fib.add(prefix, face, origin, front=True)
        return self.fib

    def add_route(self, prefix: ContentName, face: FaceId) -> None:
        self.fib.add(prefix, face)

    # ------------------------------------------------------ resource view
    @property
    def backlog(self) -> int:
        """Packets waiting for the CPU, including those parked at senders."""
        return len(self.queue) + len(self.held)

    def memory_bytes(self, t: Optional[float] = None) -> int:
        """PIT state + packets waiting for the CPU + packets parked on outgoing links."""
        t = self.sim.now if t is None else t
        parked = sum(p.parked_bytes(t) for p in self.ports.values())
        return len(self.pit) * self.config.pit_entry_bytes + self.queue_bytes + parked

    def pit_integral(self, t: SimTime) -> float:
        """Entry-seconds of PIT occupancy accumulated up to ``t``."""
        return (self._area + len(self.pit) * (t - self._area_t)) / US_PER_S

    def _advance_area(self, now: SimTime) -> None:
        self._area += len(self.pit) * (now - self._area_t)
        self._area_t = now

    def busy_time(self, t: float) -> float:
        """CPU-busy microseconds accumulated up to ``t``."""
        return self.busy_accum - max(0.0, self.busy_until - t)

    # ------------------------------------------------------ simulation glue
    def attach(self, sim) -> None:
        self.sim = sim

    def _arm_timer(self, at: int) -> None:
        if self.sim is None:
            return
        if self._timer_at is None or at < self._timer_at:
            self._timer_at = at
            self.sim.schedule(at, self.sim.PRIO_TIMER, self._fire_timer, at)

    def _fire_timer(self, at: int) -> None:
        if self._timer_at != at:
            return
        sim = self.sim
        now = sim.now
        self._timer_at = None
        self._advance_area(now)
        expired = self.on_timer(now)
        if expired:
            self.schedule_processing(now, self.last_cycles)
        nxt = self.pit.next_expiry()
        if nxt is not None:
            self._arm_timer(nxt)

    def receive(self, face: FaceId, packet, size: int, sender_port=None) -> None:
        now = self.sim.now
        queue = self.queue
        if not queue and self.busy_until <= now:
            self._serve(face, packet, now, now)
            return
        cfg = self.config
        waiting = len(queue)
        if cfg.rx_window is not None and sender_port is not None and waiting >= cfg.rx_window:
            sender_port.held_bytes += size
            self.held.append((face, packet, size, sender_port))
            return
        if cfg.backlog_cap is not None and waiting >= cfg.backlog_cap:
            self.drops[DropReason.OVERLOAD] += 1
            if type(packet) is Interest:
                self.counters["interests_in"] += 1
            return
        if len(self.pit._entries) * cfg.pit_entry_bytes + self.queue_bytes + size > cfg.mem_limit:
            self._drop_arrival(DropReason.MEMORY_FULL, packet)
            return
        queue.append((face, packet, size))
        self.queue_bytes += size
        if self._wake_at is None:
            self._schedule_wake()

    def _drop_arrival(self, reason: DropReason, packet) -> None:
        self.drops[reason] += 1
        if isinstance(packet, Interest):
            self.counters["interests_in"] += 1

    def _schedule_wake(self) -> None:
        at = max(self.sim.now, math.ceil(self.busy_until))
        self._wake_at = at
        self.sim.schedule(at, self.sim.PRIO_WAKE, self._wake)

    def _wake(self) -> None:
        sim = self.sim
        self._wake_at = None
        queue = self.queue
        while queue:
            face, packet, size = queue.popleft()
            self.queue_bytes -= size
            if self.held:
                hf, hp, hs, port = self.held.popleft()
                port.held_bytes -= hs
                queue.append((hf, hp, hs))
                self.queue_bytes += hs
            self._serve(face, packet, sim.now, self.busy_until)
            if not queue:
                return
            nxt = max(sim.now, math.ceil(self.busy_until))
            if nxt < sim.peek_time():
                sim.now = nxt
                continue
            self._schedule_wake()
            return

    def _serve(self, face: FaceId, packet, now: SimTime, start: float) -> None:
        self._area += len(self.pit._entries) * (now - self._area_t)
        self._area_t = now
        if type(packet) is Interest:
            emissions = self.on_interest(face, packet, now)
        else:
            emissions = self.on_data(face, packet, now)
        done = self.schedule_processing(start, self.last_cycles)
        if emissions:
            ports = self.ports
            for em in emissions:
                kind = type(em)
                if kind is ForwardInterest:
                    ports[em.face].send(em.interest, done)
                elif kind is SendData:
                    ports[em.face].send(em.data, done)
