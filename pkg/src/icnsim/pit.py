"""Pending Interest Table stores with per-operation cycle accounting.

Three table designs are modelled:

* ``COLLISION_OVERWRITE`` -- one slot per bucket; a colliding insert
  replaces whatever was there.
* ``CHAINING`` -- colliding names are chained; every operation pays for the
  chain positions it walks.
* ``UNIVERSAL`` -- chaining, but the bucket function is drawn at random
  when the store is created, so colliding inputs cannot be precomputed.

All stores share the public multiplicative name hash (:data:`PUBLIC_HASHER`)
unless given another one.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .names import ContentName, FaceId, SimTime

MASK64 = (1 << 64) - 1
BASE_COST = 500  # cycles per dictionary operation

_FINAL_MUL = 0x94D049BB133111EB


class NameHasher:
    """64-bit multiply-xor hash over the 8-byte little-endian words of a name.

    ``h = offset ^ len; for w in words: h = (h ^ w) * multiplier`` followed by
    an xorshift-multiply finalizer.  Bucket index is ``h % bucket_count``.
    """

    __slots__ = ("multiplier", "offset")

    def __init__(self, multiplier: int = 0x100000001B3, offset: int = 0xCBF29CE484222325):
        if multiplier % 2 == 0:
            raise ValueError("multiplier must be odd")
        self.multiplier = multiplier & MASK64
        self.offset = offset & MASK64

    @classmethod
    def random(cls, rng: np.random.Generator) -> "NameHasher":
        mult, off = (int(x) for x in rng.integers(0, 1 << 63, size=2, dtype=np.int64))
        return cls((mult << 1) | 1, off ^ (1 << 63))

    def __call__(self, name: ContentName) -> int:
        return self.hash_bytes(name.wire)

    def hash_bytes(self, wire: bytes) -> int:
        mult = self.multiplier
        h = self.offset ^ len(wire)
        for i in range(0, len(wire), 8):
            h = ((h ^ int.from_bytes(wire[i:i + 8], "little")) * mult) & MASK64
        h ^= h >> 31
        h = (h * _FINAL_MUL) & MASK64
        return h ^ (h >> 29)

    def hash_array(self, rows: np.ndarray) -> np.ndarray:
        """Hash equal-length byte strings given as a ``(n, length)`` uint8 array."""
        n, length = rows.shape
        pad = (-length) % 8
        if pad:
            rows = np.concatenate([rows, np.zeros((n, pad), dtype=np.uint8)], axis=1)
        words = np.ascontiguousarray(rows).view("<u8")
        mult = np.uint64(self.multiplier)
        h = np.full(n, self.offset ^ length, dtype=np.uint64)
        for j in range(words.shape[1]):
            h = (h ^ words[:, j]) * mult
        h ^= h >> np.uint64(31)
        h = h * np.uint64(_FINAL_MUL)
        return h ^ (h >> np.uint64(29))


PUBLIC_HASHER = NameHasher()


class PitStoreKind(enum.Enum):
    COLLISION_OVERWRITE = "collision-overwrite"
    CHAINING = "chaining"
    UNIVERSAL = "universal"


@dataclass(frozen=True)
class PitSpec:
    kind: PitStoreKind = PitStoreKind.CHAINING
    bucket_count: int = 65536
    capacity: int = 1_000_000

    def __post_init__(self):
        if self.bucket_count < 1:
            raise ValueError("bucket_count must be >= 1")
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")


class Outcome(enum.Enum):
    INSERTED = "inserted"
    AGGREGATED = "aggregated"
    OVERWROTE = "overwrote"
    REJECTED_FULL = "rejected-full"


@dataclass(slots=True)
class PitEntry:
    name: ContentName
    downstream_faces: set[FaceId]
    expiry: SimTime
    insert_time: SimTime
    refresh_count: int = 0
    bucket: int = field(default=-1, compare=False, repr=False)

    def __post_init__(self):
        if not self.downstream_faces:
            raise ValueError("a pending entry needs at least one downstream face")
        if self.expiry <= self.insert_time:
            raise ValueError("expiry must be later than insert_time")


class InsertResult(NamedTuple):
    outcome: Outcome
    cost: int
    entry: Optional[PitEntry]
    #: True when the new request came from a face already waiting on the name.
    refreshed: bool = False
    #: Name whose state was destroyed by a CollisionOverwrite insert.
    evicted: Optional[ContentName] = None


class PitStore:
    """Common bookkeeping: live entries, the expiry heap and cost counters."""

    kind: PitStoreKind

    def __init__(self, spec: PitSpec, hasher: NameHasher = PUBLIC_HASHER, base_cost: int = BASE_COST):
        self.spec = spec
        self.capacity = spec.capacity
        self.bucket_count = spec.bucket_count
        self.hasher = hasher
        self.base_cost = base_cost
        self._entries: dict[ContentName, PitEntry] = {}
        # one (due, seq, entry) per stored entry; refreshed entries are
        # re-armed lazily when their old due time comes up
        self._timers: list[tuple[int, int, PitEntry]] = []
        self._seq = 0
        self._lapsed: list[PitEntry] = []
        self.total_cycles = 0
        self.ops = 0
        self.overwrites = 0
        # name -> bucket, so repeated requests hash once
        self._buckets: dict[ContentName, int] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: ContentName) -> bool:
        return name in self._entries

    def entries(self) -> list[PitEntry]:
        return list(self._entries.values())

    def bucket_of(self, name: ContentName) -> int:
        memo = self._buckets
        b = memo.get(name)
        if b is None:
            if len(memo) >= 1 << 18:
                memo.clear()
            b = memo[name] = self.hasher.hash_bytes(name.wire) % self.bucket_count
        return b

    def _charge(self, cycles: int) -> int:
        self.total_cycles += cycles
        self.ops += 1
        return cycles

    def _arm(self, entry: PitEntry) -> None:
        self._seq += 1
        heapq.heappush(self._timers, (entry.expiry, self._seq, entry))

    def next_expiry(self) -> Optional[SimTime]:
        """Earliest expiry among stored entries, or None."""
        timers, entries = self._timers, self._entries
        while timers:
            at, _, e = timers[0]
            if entries.get(e.name) is not e:
                heapq.heappop(timers)
            elif e.expiry != at:
                heapq.heappop(timers)
                self._arm(e)
            else:
                return at
        return None

    # subclasses provide the bucket structure
    def _find(self, name: ContentName) -> tuple[Optional[PitEntry], int]:
        raise NotImplementedError

    def _place(self, entry: PitEntry) -> tuple[Outcome, int, Optional[ContentName]]:
        raise NotImplementedError

    def _unlink(self, entry: PitEntry) -> None:
        raise NotImplementedError

    def insert(self, entry: PitEntry, now: SimTime) -> InsertResult:
        return self.offer(entry.name, entry.downstream_faces, entry.expiry, now, entry)

    def offer(self, name: ContentName, faces, expiry: SimTime, now: SimTime,
              entry: Optional[PitEntry] = None) -> InsertResult:
        """Insert or aggregate a request for ``name`` from ``faces``.

        Builds the :class:`PitEntry` only when a new entry is stored.
        """
        if expiry <= now:
            raise ValueError(f"entry for {name} already expired at {now}")
        found, scanned = self._find(name)
        if found is not None and found.expiry < now:
            # lapsed before the timer reached it; report it on the next expire()
            self._drop(found)
            self._lapsed.append(found)
            found = None
        self.ops += 1
        if found is not None:
            refreshed = not found.downstream_faces.isdisjoint(faces)
            found.downstream_faces.update(faces)
            if refreshed:
                found.refresh_count += 1
            if expiry > found.expiry:
                found.expiry = expiry
            cost = self.base_cost * (scanned if scanned > 1 else 1)
            self.total_cycles += cost
            return InsertResult(Outcome.AGGREGATED, cost, found, refreshed)
        if entry is None:
            entry = PitEntry(name, set(faces), expiry, now)
        outcome, cost, evicted = self._place(entry)
        self.total_cycles += cost
        if outcome is Outcome.REJECTED_FULL:
            return InsertResult(outcome, cost, None, False, evicted)
        self._entries[name] = entry
        self._arm(entry)
        return InsertResult(outcome, cost, entry, False, evicted)

    def lookup(self, name: ContentName, now: SimTime) -> tuple[Optional[PitEntry], int]:
        found, scanned = self._find(name)
        if found is not None and found.expiry < now:
            found = None
        return found, self._charge(self.base_cost * max(1, scanned))

    def remove(self, name: ContentName) -> tuple[bool, int]:
        found, scanned = self._find(name)
        cost = self._charge(self.base_cost * max(1, scanned))
        if found is None:
            return False, cost
        self._drop(found)
        return True, cost

    def _drop(self, entry: PitEntry) -> None:
        del self._entries[entry.name]
        self._unlink(entry)

    def expire(self, now: SimTime) -> tuple[list[PitEntry], int]:
        """Remove and return every entry with ``expiry <= now``."""
        out = self._lapsed
        self._lapsed = []
        timers, entries = self._timers, self._entries
        while timers and timers[0][0] <= now:
            at, _, e = heapq.heappop(timers)
            if entries.get(e.name) is not e:
                continue
            if e.expiry <= now:
                self._drop(e)
                out.append(e)
            else:
                self._arm(e)
        return out, self._charge(self.base_cost * (1 + len(out)))


class CollisionOverwritePit(PitStore):
    kind = PitStoreKind.COLLISION_OVERWRITE

    def __init__(self, spec, hasher=PUBLIC_HASHER, base_cost=BASE_COST):
        super().__init__(spec, hasher, base_cost)
        self._slots: dict[int, ContentName] = {}

    def _find(self, name):
        e = self._entries.get(name)
        return e, 1

    def _place(self, entry):
        b = self.bucket_of(entry.name)
        entry.bucket = b
        occupant = self._slots.get(b)
        if occupant is not None:
            del self._entries[occupant]
            self._slots[b] = entry.name
            self.overwrites += 1
            return Outcome.OVERWROTE, self.base_cost, occupant
        if len(self._entries) >= self.capacity:
            return Outcome.REJECTED_FULL, self.base_cost, None
        self._slots[b] = entry.name
        return Outcome.INSERTED, self.base_cost, None

    def _unlink(self, entry):
        if self._slots.get(entry.bucket) == entry.name:
            del self._slots[entry.bucket]


class ChainingPit(PitStore):
    kind = PitStoreKind.CHAINING

    def __init__(self, spec, hasher=PUBLIC_HASHER, base_cost=BASE_COST):
        super().__init__(spec, hasher, base_cost)
        # bucket -> wire forms of the chained names, in insertion order
        self._chains: dict[int, list[bytes]] = {}

    def chain_length(self, bucket: int) -> int:
        return len(self._chains.get(bucket, ()))

    def _find(self, name):
        e = self._entries.get(name)
        if e is not None:
            return e, self._chains[e.bucket].index(name.wire) + 1
        chain = self._chains.get(self.bucket_of(name))
        return None, len(chain) if chain else 0

    def _place(self, entry):
        if len(self._entries) >= self.capacity:
            return Outcome.REJECTED_FULL, self.base_cost, None
        b = self.bucket_of(entry.name)
        entry.bucket = b
        chain = self._chains.setdefault(b, [])
        cost = self.base_cost * (1 + len(chain))
        chain.append(entry.name.wire)
        return Outcome.INSERTED, cost, None

    def _unlink(self, entry):
        chain = self._chains[entry.bucket]
        chain.remove(entry.name.wire)
        if not chain:
            del self._chains[entry.bucket]


class UniversalPit(ChainingPit):
    kind = PitStoreKind.UNIVERSAL

    def __init__(self, spec, rng: np.random.Generator, base_cost=BASE_COST, hasher: Optional[NameHasher] = None):
        super().__init__(spec, hasher or NameHasher.random(rng), base_cost)


def make_pit(spec: PitSpec, rng: Optional[np.random.Generator] = None, base_cost: int = BASE_COST) -> PitStore:
    if spec.kind is PitStoreKind.COLLISION_OVERWRITE:
        return CollisionOverwritePit(spec, base_cost=base_cost)
    if spec.kind is PitStoreKind.CHAINING:
        return ChainingPit(spec, base_cost=base_cost)
    if rng is None:
        raise ValueError("a universal PIT needs a random generator")
    return UniversalPit(spec, rng, base_cost=base_cost)


def _counter_rows(start: int, n: int, width: int) -> np.ndarray:
    digits = np.empty((n, width), dtype=np.uint8)
    vals = np.arange(start, start + n, dtype=np.int64)
    for j in range(width - 1, -1, -1):
        digits[:, j] = 48 + vals % 10
        vals //= 10
    return digits


def colliding_names(
    hasher: NameHasher,
    bucket_count: int,
    count: int,
    seed: int = 0,
    batch: int = 1 << 20,
    max_candidates: int = 1 << 34,
) -> list[ContentName]:
    """Search suffix counters ``/adv/s<seed>/<counter>#0`` until ``count`` of
    them land in the bucket of counter 0 under ``hasher``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    width = 12
    tag = b"s%d" % seed
    head = b"/adv/" + tag + b"/"
    head_row = np.frombuffer(head, dtype=np.uint8)
    tail_row = np.frombuffer(b"#0", dtype=np.uint8)
    found: list[int] = []
    target = None
    start = 0
    while len(found) < count:
        if start >= max_candidates:
            raise RuntimeError("collision search exceeded its candidate budget")
        n = min(batch, max_candidates - start)
        rows = np.concatenate(
            [np.broadcast_to(head_row, (n, head_row.size)), _counter_rows(start, n, width),
             np.broadcast_to(tail_row, (n, tail_row.size))], axis=1)
        buckets = hasher.hash_array(rows) % np.uint64(bucket_count)
        if target is None:
            target = buckets[0]
        hits = np.flatnonzero(buckets == target)
        found.extend(int(start + h) for h in hits[: count - len(found)])
        start += n
    return [ContentName((b"adv", tag, b"%0*d" % (width, c)), 0) for c in found]


def adversarial_names(spec: PitSpec, count: int, seed: int = 0) -> list[ContentName]:
    """Names that all share one bucket of the store kind's public hash.

    Universal stores pick their function at random, so there is nothing to
    target and a ``ValueError`` is raised.
    """
    if spec.kind is PitStoreKind.UNIVERSAL:
        raise ValueError("hash function not predictable")
    return colliding_names(PUBLIC_HASHER, spec.bucket_count, count, seed)
