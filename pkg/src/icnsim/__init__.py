"""Discrete-event simulator of NDN-style forwarding state under load and attack."""

from .names import ContentName, DataPacket, Interest, chunk_names, name, name_prefix_match
from .pit import (NameHasher, Outcome, PitEntry, PitSpec, PitStoreKind, adversarial_names,
                  make_pit)
from .router import CpuProfile, DropReason, RateLimit, RateScope, Router, RouterConfig

__version__ = "0.1.0"

__all__ = [
    "ContentName", "DataPacket", "Interest", "chunk_names", "name", "name_prefix_match",
    "NameHasher", "Outcome", "PitEntry", "PitSpec", "PitStoreKind", "adversarial_names", "make_pit",
    "CpuProfile", "DropReason", "RateLimit", "RateScope", "Router", "RouterConfig",
]
