"""Topologies: nodes, links and the daisy-chain builder.

In a chain every router uses face 0 towards the consumer and face 1 towards
the repository.  Hop 1 is the consumer's access router; hop n is next to the
repository.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..names import ContentName, name
from ..router import CpuProfile, Router, RouterConfig
from .links import Link, LinkKind

DOWN, UP = 0, 1
DEFAULT_CAPACITY = 100e6
DEFAULT_PROPAGATION_US = 1000


@dataclass(frozen=True)
class LinkSpec:
    capacity_bps: float = DEFAULT_CAPACITY
    propagation_us: int = DEFAULT_PROPAGATION_US


class Topology:
    def __init__(self):
        self.nodes: dict[str, object] = {}
        self.links: list[Link] = []

    def add_node(self, node) -> None:
        if node.id in self.nodes:
            raise ValueError(f"duplicate node id {node.id!r}")
        self.nodes[node.id] = node

    def connect(self, a, face_a: int, b, face_b: int, spec: LinkSpec = LinkSpec(),
                link_name: Optional[str] = None) -> Link:
        link = Link(link_name or f"{a.id}-{b.id}", spec.capacity_bps, spec.propagation_us)
        for node, face in ((a, face_a), (b, face_b)):
            if face in node.ports:
                raise ValueError(f"{node.id}: face {face} already in use")
            node.ports[face] = link.connect(node, face)
        self.links.append(link)
        return link

    def shared(self, members: Sequence[tuple[object, int]], spec: LinkSpec = LinkSpec(),
               link_name: str = "shared") -> Link:
        link = Link(link_name, spec.capacity_bps, spec.propagation_us, LinkKind.SHARED_BROADCAST)
        for node, face in members:
            if face in node.ports:
                raise ValueError(f"{node.id}: face {face} already in use")
            node.ports[face] = link.connect(node, face)
        self.links.append(link)
        return link

    @property
    def routers(self) -> list[Router]:
        return [n for n in self.nodes.values() if isinstance(n, Router)]

    def hops(self) -> list[Router]:
        """Routers named ``R1..Rn`` in hop order."""
        rs = [r for r in self.routers if r.id[1:].isdigit()]
        return sorted(rs, key=lambda r: int(r.id[1:]))

    def validate(self) -> None:
        if not self.nodes:
            raise ValueError("topology has no nodes")
        for link in self.links:
            if len(link.ports) < 2:
                raise ValueError(f"{link.name}: dangling link")
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for link in self.links:
            ids = [p.node.id for p in link.ports]
            for a in ids:
                adj[a].update(i for i in ids if i != a)
        start = next(iter(self.nodes))
        seen = {start}
        todo = deque([start])
        while todo:
            for nb in adj[todo.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    todo.append(nb)
        if len(seen) != len(self.nodes):
            missing = sorted(set(self.nodes) - seen)
            raise ValueError(f"topology not connected: {missing}")


def _per_hop(value, hops: int, what: str) -> list:
    if isinstance(value, (list, tuple)):
        if len(value) != hops:
            raise ValueError(f"{what}: expected {hops} entries, got {len(value)}")
        return list(value)
    return [value] * hops


def build_chain(hops: int, link_caps: Union[float, Sequence[float]] = DEFAULT_CAPACITY,
                router_configs: Union[RouterConfig, Sequence[RouterConfig], None] = None,
                consumer=None, repository=None, *,
                profiles: Union[CpuProfile, Sequence[Optional[CpuProfile]], None] = None,
                propagation_us: Union[int, Sequence[int]] = DEFAULT_PROPAGATION_US,
                prefixes: Sequence[Union[str, ContentName]] = ("/repo",),
                seed: int = 0) -> Topology:
    """consumer - R1 - ... - Rn - repository.

    ``link_caps`` and ``propagation_us`` take one value or ``hops + 1`` values
    (consumer side first).  Routes for ``prefixes`` point upstream.
    """
    if hops < 1:
        raise ValueError("a chain needs at least one router")
    caps = _per_hop(link_caps, hops + 1, "link_caps")
    props = _per_hop(propagation_us, hops + 1, "propagation_us")
    configs = _per_hop(router_configs or RouterConfig(), hops, "router_configs")
    profs = _per_hop(profiles, hops, "profiles")
    from .agents import Consumer, Repository

    topo = Topology()
    consumer = consumer if consumer is not None else Consumer("consumer")
    repository = repository if repository is not None else Repository("repository")
    topo.add_node(consumer)
    routers = []
    for i in range(hops):
        rid = f"R{i + 1}"
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i + 1,)))
        r = Router(rid, configs[i], rng, profs[i])
        topo.add_node(r)
        routers.append(r)
    topo.add_node(repository)
    chain = [consumer, *routers, repository]
    for i, (a, b) in enumerate(zip(chain, chain[1:])):
        fa = 0 if a is consumer else UP
        fb = 0 if b is repository else DOWN
        topo.connect(a, fa, b, fb, LinkSpec(caps[i], props[i]))
    for r in routers:
        for p in prefixes:
            r.add_route(name(p), UP)
    return topo
