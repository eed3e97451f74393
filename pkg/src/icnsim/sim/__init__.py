"""Event engine, links, topologies and end-system agents."""

from .agents import (BulkDownload, Consumer, Endpoint, FloodNonexistent, PoissonRequests,
                     Repository, consumer_behavior, gamma_delay)
from .engine import Simulation, TimeRegression, run, set_cpu_profile
from .links import Link, LinkKind, Port, TxQueue
from .topology import DOWN, UP, LinkSpec, Topology, build_chain

__all__ = [
    "BulkDownload", "Consumer", "Endpoint", "FloodNonexistent", "PoissonRequests", "Repository",
    "consumer_behavior", "gamma_delay", "Simulation", "TimeRegression", "run", "set_cpu_profile",
    "Link", "LinkKind", "Port", "TxQueue", "DOWN", "UP", "LinkSpec", "Topology", "build_chain",
]
