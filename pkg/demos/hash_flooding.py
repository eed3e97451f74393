"""Lookup cost of colliding names against the three PIT designs."""

import numpy as np

from icnsim.names import ContentName
from icnsim.pit import PitSpec, PitStoreKind, adversarial_names, make_pit

N = 2000
spec = PitSpec(kind=PitStoreKind.CHAINING, bucket_count=2048)
evil = adversarial_names(spec, N)
rng = np.random.default_rng(0)
plain = [ContentName((b"rnd", b"%016x" % int(x)), 0) for x in rng.integers(0, 1 << 62, N)]

for kind in PitStoreKind:
    for label, names in (("random", plain), ("colliding", evil)):
        pit = make_pit(PitSpec(kind=kind, bucket_count=2048), np.random.default_rng(1))
        outcomes = [pit.offer(nm, (0,), 10**9, 0).outcome.value for nm in names]
        cost = np.mean([pit.lookup(nm, 1)[1] for nm in names])
        print(f"{kind.value:20s} {label:9s} mean lookup {cost:9.0f} cycles, "
              f"{len(pit):5d} stored, {outcomes.count('overwrote'):5d} overwritten")
