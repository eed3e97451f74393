import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icnsim.names import ContentName, name
from icnsim.pit import (BASE_COST, PUBLIC_HASHER, NameHasher, Outcome, PitEntry, PitSpec, PitStoreKind,
                        adversarial_names, colliding_names, make_pit)

KINDS = list(PitStoreKind)


def _pit(kind, **spec):
    return make_pit(PitSpec(kind=kind, **spec), np.random.default_rng(3))


def _brute_force_pair(hasher, buckets):
    # independent route: plain loop over hash_bytes until two names share a bucket
    seen = {}
    for i in range(10_000):
        nm = ContentName((b"pair", b"%d" % i), 0)
        b = hasher.hash_bytes(nm.wire) % buckets
        if b in seen:
            return seen[b], nm
        seen[b] = nm
    raise AssertionError("no pair found")


# --------------------------------------------------------------- semantics

@pytest.mark.parametrize("kind", KINDS)
def test_insert_aggregate_remove(kind):
    pit = _pit(kind)
    nm = name("/a/b#0")
    res = pit.offer(nm, (0,), 100, 0)
    assert res.outcome is Outcome.INSERTED and nm in pit
    again = pit.offer(nm, (1,), 50, 10)
    assert again.outcome is Outcome.AGGREGATED and not again.refreshed
    assert again.entry.downstream_faces == {0, 1}
    assert again.entry.expiry == 100  # a shorter lifetime never shortens the entry
    refresh = pit.offer(nm, (0,), 200, 20)
    assert refresh.refreshed and refresh.entry.refresh_count == 1 and refresh.entry.expiry == 200
    entry, _ = pit.lookup(nm, 30)
    assert entry is refresh.entry
    assert pit.remove(nm)[0] and nm not in pit and len(pit) == 0
    assert not pit.remove(nm)[0]


@pytest.mark.parametrize("kind", KINDS)
def test_expiry_returns_due_entries_only(kind):
    pit = _pit(kind)
    for i, exp in enumerate([50, 100, 150]):
        pit.offer(name(f"/x/{i}#0"), (0,), exp, 0)
    pit.offer(name("/x/0#0"), (0,), 120, 40)  # refresh pushes the first entry later
    assert pit.next_expiry() == 100
    gone, cost = pit.expire(110)
    assert [e.name for e in gone] == [name("/x/1#0")]
    assert cost == BASE_COST * 2
    assert pit.next_expiry() == 120
    gone, _ = pit.expire(1000)
    assert sorted(str(e.name) for e in gone) == ["/x/0#0", "/x/2#0"]
    assert pit.next_expiry() is None


def test_entry_validation():
    with pytest.raises(ValueError):
        PitEntry(name("/a#0"), set(), 10, 0)
    with pytest.raises(ValueError):
        PitEntry(name("/a#0"), {0}, 0, 0)
    with pytest.raises(ValueError):
        _pit(PitStoreKind.CHAINING).offer(name("/a#0"), (0,), 5, 5)


@pytest.mark.parametrize("kind", [PitStoreKind.CHAINING, PitStoreKind.UNIVERSAL])
def test_capacity_rejects_new_names(kind):
    pit = _pit(kind, capacity=2)
    pit.offer(name("/a#0"), (0,), 10, 0)
    pit.offer(name("/b#0"), (0,), 10, 0)
    res = pit.offer(name("/c#0"), (0,), 10, 0)
    assert res.outcome is Outcome.REJECTED_FULL and len(pit) == 2
    assert pit.offer(name("/a#0"), (1,), 10, 0).outcome is Outcome.AGGREGATED


# ------------------------------------------------------------- collisions

def test_collision_overwrite_replaces_occupant():
    a, b = _brute_force_pair(PUBLIC_HASHER, 64)
    pit = _pit(PitStoreKind.COLLISION_OVERWRITE, bucket_count=64)
    pit.offer(a, (0,), 10, 0)
    res = pit.offer(b, (0,), 10, 0)
    assert res.outcome is Outcome.OVERWROTE and res.evicted == a
    assert a not in pit and b in pit and pit.overwrites == 1


def test_chaining_keeps_both_and_charges_position():
    a, b = _brute_force_pair(PUBLIC_HASHER, 64)
    pit = _pit(PitStoreKind.CHAINING, bucket_count=64)
    assert pit.offer(a, (0,), 10, 0).cost == BASE_COST
    assert pit.offer(b, (0,), 10, 0).cost == 2 * BASE_COST
    assert pit.lookup(a, 0)[1] == BASE_COST and pit.lookup(b, 0)[1] == 2 * BASE_COST
    assert pit.chain_length(pit.bucket_of(a)) == 2
    pit.remove(a)
    assert pit.lookup(b, 0)[1] == BASE_COST


def test_adversarial_names_share_one_bucket():
    spec = PitSpec(kind=PitStoreKind.CHAINING, bucket_count=256)
    evil = adversarial_names(spec, 3)
    assert len(set(evil)) == 3
    assert len({PUBLIC_HASHER.hash_bytes(nm.wire) % 256 for nm in evil}) == 1
    pit = make_pit(spec)
    for nm in evil:
        pit.offer(nm, (0,), 10, 0)
    assert pit.chain_length(pit.bucket_of(evil[0])) == 3


def test_universal_has_no_predictable_hash():
    with pytest.raises(ValueError):
        adversarial_names(PitSpec(kind=PitStoreKind.UNIVERSAL), 3)
    with pytest.raises(ValueError):
        make_pit(PitSpec(kind=PitStoreKind.UNIVERSAL))


def test_universal_scatters_names_aimed_at_public_hash():
    evil = colliding_names(PUBLIC_HASHER, 256, 50)
    pit = _pit(PitStoreKind.UNIVERSAL, bucket_count=256)
    assert len({pit.bucket_of(nm) for nm in evil}) > 30


# ------------------------------------------------------------ properties

@settings(max_examples=60, deadline=None)
@given(st.lists(st.binary(min_size=1, max_size=40), min_size=1, max_size=20), st.integers(0, (1 << 63) - 1))
def test_array_hash_matches_scalar_hash(blobs, seed):
    hasher = NameHasher.random(np.random.default_rng(seed))
    width = max(len(b) for b in blobs)
    same = [b.ljust(width, b"x") for b in blobs]
    rows = np.frombuffer(b"".join(same), dtype=np.uint8).reshape(len(same), width)
    assert [int(h) for h in hasher.hash_array(rows)] == [hasher.hash_bytes(b) for b in same]


ops = st.lists(st.tuples(st.sampled_from(["offer", "remove", "expire"]), st.integers(0, 30),
                         st.integers(1, 50)), max_size=120)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(KINDS), st.integers(1, 8), st.integers(1, 12), ops)
def test_store_matches_reference_model(kind, buckets, capacity, steps):
    pit = _pit(kind, bucket_count=buckets, capacity=capacity)
    model: dict = {}  # name -> expiry
    now = 0
    for op, key, dt in steps:
        now += dt
        nm = ContentName((b"k", b"%d" % key), 0)
        if op == "offer":
            res = pit.offer(nm, (0,), now + 40, now)
            if res.outcome is Outcome.OVERWROTE:
                del model[res.evicted]
            if res.outcome is not Outcome.REJECTED_FULL:
                old = model.get(nm, -1)
                model[nm] = max(old, now + 40) if old >= now else now + 40
            else:
                assert len(model) >= capacity
        elif op == "remove":
            found, _ = pit.remove(nm)
            assert found == (nm in model)
            model.pop(nm, None)
        else:
            gone, _ = pit.expire(now)
            for e in gone:
                # a lapsed entry may be reported after its name was inserted again
                assert e.expiry <= now
                if model.get(e.name) == e.expiry:
                    del model[e.name]
        assert len(pit) <= capacity
        live = {n for n, exp in model.items() if exp >= now}
        assert live <= set(e.name for e in pit.entries())
        if kind is PitStoreKind.COLLISION_OVERWRITE:
            assert len({pit.bucket_of(e.name) for e in pit.entries()}) == len(pit)
        else:
            assert sum(pit.chain_length(b) for b in range(buckets)) == len(pit)
