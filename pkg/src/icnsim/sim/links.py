"""Point-to-point and shared links with FIFO serialization.

Each sending :class:`Port` owns a transmit queue (a shared link owns one for
all members).  Serialization takes ``size_bits / capacity``; the copy arrives
``propagation`` later.  Transmitted bits are metered exactly per interval, so
bits reported for any window never exceed ``capacity * window``.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from typing import Optional

from ..names import Interest, US_PER_S


class LinkKind(enum.Enum):
    POINT_TO_POINT = "p2p"
    SHARED_BROADCAST = "shared"


class TxQueue:
    """FIFO transmitter; tracks bits on the wire and bytes still queued."""

    __slots__ = ("capacity", "free_at", "_pending", "_done_bits", "_queued_bytes", "sent_bits", "packets",
                 "flight", "armed")

    def __init__(self, capacity_bps: float):
        self.capacity = capacity_bps
        self.free_at = 0.0
        # (handed, start, end, bits, size)
        self._pending: deque = deque()
        self._done_bits = 0.0
        self._queued_bytes = 0
        self.sent_bits = 0
        self.packets = 0
        # (arrival_us, packet, size, sender port) not yet delivered
        self.flight: deque = deque()
        self.armed = False

    def push(self, handed: float, size: int) -> float:
        bits = size * 8
        start = handed if handed > self.free_at else self.free_at
        end = start + bits * US_PER_S / self.capacity
        self.free_at = end
        self._pending.append((handed, start, end, bits, size))
        self._queued_bytes += size
        self.sent_bits += bits
        self.packets += 1
        return end

    def _settle(self, t: float) -> None:
        pending = self._pending
        while pending and pending[0][2] <= t:
            _, _, _, bits, size = pending.popleft()
            self._done_bits += bits
            self._queued_bytes -= size

    def bits_until(self, t: float) -> float:
        """Bits fully or partially serialized by time ``t`` (monotone in t)."""
        self._settle(t)
        total = self._done_bits
        if self._pending:
            _, start, end, bits, _ = self._pending[0]
            if start < t:
                total += bits * (t - start) / (end - start)
        return total

    def queued_bytes(self, t: float) -> int:
        """Bytes handed to the link by ``t`` whose serialization is unfinished."""
        self._settle(t)
        total = self._queued_bytes
        for handed, _, _, _, size in reversed(self._pending):
            if handed <= t:
                break
            total -= size
        return total


class Port:
    """One node's attachment to a link (its face)."""

    __slots__ = ("node", "face", "link", "tx", "held_bytes")

    def __init__(self, node, face: int, link: "Link"):
        self.node = node
        self.face = face
        self.link = link
        self.tx: Optional[TxQueue] = None
        # bytes the receiver refused to take yet (reliable hop-by-hop transport)
        self.held_bytes = 0

    def send(self, packet, depart: float) -> None:
        self.link.transmit(self, packet, depart)

    def send_many(self, packets, depart: float) -> None:
        self.link.transmit_train(self, packets, depart)

    def parked_bytes(self, t: float) -> int:
        return self.held_bytes + self.tx.queued_bytes(t)

    @property
    def peers(self) -> list["Port"]:
        return [p for p in self.link.ports if p is not self]

    def __repr__(self):
        return f"Port({self.node.id}:{self.face})"


class Link:
    def __init__(self, name: str, capacity_bps: float, propagation_us: int = 1000,
                 kind: LinkKind = LinkKind.POINT_TO_POINT):
        if capacity_bps <= 0:
            raise ValueError("link capacity must be positive")
        if propagation_us < 0:
            raise ValueError("propagation delay must be >= 0")
        self.name = name
        self.capacity = capacity_bps
        self.propagation = propagation_us
        self.kind = kind
        self.ports: list[Port] = []
        self.sim = None
        self._shared_tx = TxQueue(capacity_bps) if kind is LinkKind.SHARED_BROADCAST else None

    def __repr__(self):
        return f"Link({self.name})"

    def connect(self, node, face: int) -> Port:
        if self.kind is LinkKind.POINT_TO_POINT and len(self.ports) == 2:
            raise ValueError(f"{self.name}: a point-to-point link has two ends")
        port = Port(node, face, self)
        port.tx = self._shared_tx or TxQueue(self.capacity)
        self.ports.append(port)
        return port

    def direction_name(self, port: Port) -> str:
        if self.kind is LinkKind.SHARED_BROADCAST:
            return self.name
        other = self.ports[1] if self.ports[0] is port else self.ports[0]
        return f"{port.node.id}->{other.node.id}"

    def transmit(self, port: Port, packet, depart: float) -> float:
        """Queue ``packet`` behind earlier ones; returns its arrival time (µs)."""
        tx = port.tx
        size = packet.wire_size
        arrival = tx.push(depart, size) + self.propagation
        tx.flight.append((math.ceil(arrival), packet, size, port))
        if not tx.armed:
            self._arm(tx)
        return arrival

    def transmit_train(self, port: Port, packets, depart: float) -> None:
        """Queue back-to-back ``packets`` handed over at the same instant."""
        tx = port.tx
        flight = tx.flight
        pending = tx._pending
        prop = self.propagation
        ceil = math.ceil
        per_bit = US_PER_S / tx.capacity
        end = depart if depart > tx.free_at else tx.free_at
        total = 0
        n = 0
        for packet in packets:
            size = packet.wire_size
            start = end
            end = start + size * 8 * per_bit
            pending.append((depart, start, end, size * 8, size))
            flight.append((ceil(end + prop), packet, size, port))
            total += size
            n += 1
        tx.free_at = end
        tx._queued_bytes += total
        tx.sent_bits += total * 8
        tx.packets += n
        if flight and not tx.armed:
            self._arm(tx)

    # Arrivals leave each transmitter in FIFO order at non-decreasing times,
    # so one pending event per transmitter is enough: it delivers the head
    # and keeps going while the next arrival is still ahead of the queue.
    def _arm(self, tx: TxQueue) -> None:
        sim = self.sim
        at, packet = tx.flight[0][:2]
        prio = sim.PRIO_INTEREST if type(packet) is Interest else sim.PRIO_DATA
        tx.armed = True
        sim.schedule(at, prio, self._deliver, tx)

    def _deliver(self, tx: TxQueue) -> None:
        sim = self.sim
        flight = tx.flight
        ports = self.ports
        while True:
            _, packet, size, sender = flight.popleft()
            for peer in ports:
                if peer is not sender:
                    peer.node.receive(peer.face, packet, size, sender)
            if not flight:
                tx.armed = False
                return
            at = flight[0][0]
            if at < sim.peek_time():
                sim.now = at
                continue
            tx.armed = False
            self._arm(tx)
            return
