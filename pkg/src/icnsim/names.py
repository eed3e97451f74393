"""Names, packets and time units shared by every part of the simulator.

Simulation time is an integer number of microseconds since the start of a
run.  Names serialize as ``/comp1/comp2#chunk``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

US_PER_S = 1_000_000
US_PER_MS = 1_000

#: Payload bytes per chunk when a scenario does not say otherwise.
DEFAULT_CHUNK_SIZE = 4096
#: Fixed header bytes added to every packet on the wire.
INTEREST_OVERHEAD = 64
DATA_OVERHEAD = 64

FaceId = int
SimTime = int


def seconds(us: float) -> float:
    return us / US_PER_S


def to_us(secs: float) -> int:
    """Convert seconds to integer microseconds (rounded to nearest)."""
    return int(round(secs * US_PER_S))


@dataclass(frozen=True, slots=True)
class ContentName:
    """Hierarchical content name with an optional chunk index."""

    components: tuple[bytes, ...]
    chunk: Optional[int] = None
    wire: bytes = field(default=b"", compare=False, hash=False, repr=False)
    _hash: int = field(default=0, compare=False, hash=False, repr=False)

    def __post_init__(self) -> None:
        comps = self.components
        if not isinstance(comps, tuple):
            comps = tuple(comps)
            object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("a name needs at least one component")
        for c in comps:
            if not isinstance(c, bytes) or not c:
                raise ValueError(f"invalid name component {c!r}")
        if self.chunk is not None and (not isinstance(self.chunk, int) or self.chunk < 0):
            raise ValueError(f"invalid chunk index {self.chunk!r}")
        wire = b"/" + b"/".join(comps)
        if self.chunk is not None:
            wire += b"#%d" % self.chunk
        object.__setattr__(self, "wire", wire)
        object.__setattr__(self, "_hash", hash((comps, self.chunk)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def parse(cls, text: Union[str, bytes]) -> "ContentName":
        """Parse ``/a/b#3`` (chunk optional)."""
        if isinstance(text, str):
            text = text.encode()
        chunk = None
        if b"#" in text:
            text, _, tail = text.rpartition(b"#")
            chunk = int(tail)
        if not text.startswith(b"/"):
            raise ValueError(f"name must start with '/': {text!r}")
        return cls(tuple(text[1:].split(b"/")), chunk)

    def with_chunk(self, chunk: Optional[int]) -> "ContentName":
        return ContentName(self.components, chunk)

    def child(self, component: Union[str, bytes]) -> "ContentName":
        if isinstance(component, str):
            component = component.encode()
        return ContentName(self.components + (component,))

    @property
    def prefix(self) -> "ContentName":
        """The same name without its chunk index."""
        return ContentName(self.components) if self.chunk is not None else self

    def __str__(self) -> str:
        return self.wire.decode("utf-8", "backslashreplace")

    def __len__(self) -> int:
        return len(self.components)


def name(text: Union[str, bytes, ContentName]) -> ContentName:
    """Coerce a string such as ``"/a/b#0"`` to a :class:`ContentName`."""
    if isinstance(text, ContentName):
        return text
    return ContentName.parse(text)


def name_prefix_match(candidate: ContentName, prefix: ContentName) -> bool:
    """True iff ``prefix``'s components lead ``candidate``'s; chunks are ignored."""
    n = len(prefix.components)
    return n <= len(candidate.components) and candidate.components[:n] == prefix.components


def chunk_names(base: ContentName, file_size: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[ContentName]:
    """Names of the chunks that make up a file of ``file_size`` bytes."""
    if file_size <= 0 or chunk_size <= 0:
        raise ValueError("file_size and chunk_size must be positive")
    count = -(-file_size // chunk_size)
    comps = base.components
    return [ContentName(comps, i) for i in range(count)]


@dataclass(slots=True)
class Interest:
    name: ContentName
    nonce: int
    lifetime_ms: float = 4000.0
    issued_at: SimTime = 0
    #: bytes on the wire (header plus name)
    wire_size: int = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.lifetime_ms <= 0:
            raise ValueError("interest lifetime must be positive")
        self.wire_size = INTEREST_OVERHEAD + len(self.name.wire)

    @property
    def lifetime_us(self) -> int:
        return int(self.lifetime_ms * US_PER_MS)



@dataclass(slots=True)
class DataPacket:
    name: ContentName
    payload_size: int
    wire_size: int = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.payload_size <= 0:
            raise ValueError("payload_size must be positive")
        if self.name.chunk is None:
            raise ValueError("data must name a concrete chunk")
        self.wire_size = DATA_OVERHEAD + len(self.name.wire) + self.payload_size
