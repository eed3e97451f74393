"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and echoed in pytest's terminal summary.
Heavy runs are desk scale and shared through the session cache in conftest.
"""

import time

import numpy as np

from conftest import desk_run, timed_run
from icnsim.analytic import RttModel, memory_requirement, state_from_rate
from icnsim.pit import (NameHasher, Outcome, PitSpec, PitStoreKind, adversarial_names, colliding_names,
                        make_pit)
from icnsim.names import ContentName
from icnsim.router import RouterConfig
from icnsim.scenarios.catalog import SCENARIOS, Scenario, get_scenario
from icnsim.scenarios.properties import evaluate
from icnsim.sim import Consumer, PoissonRequests, Repository, Simulation, build_chain, gamma_delay
from icnsim.metrics import retransmit_ordering

RESULTS: list[str] = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# -------------------------------------------------------------- 1 analytic

def test_criterion_01_memory_sizing():
    m1 = memory_requirement(1e9)
    m100 = memory_requirement(100e9)
    ok = 150_000 <= m1 <= 160_000 and 15.0e6 <= m100 <= 16.0e6
    report(1, ok, f"memory_requirement(1 Gbit/s) = {m1:,.0f}, (100 Gbit/s) = {m100:,.0f}")


# ------------------------------------------------------- 2, 3 Little's law

def _poisson_hop(delay, seed: int, alpha: float = 500.0, duration: float = 61.0):
    # effectively infinite CPU and bandwidth, no propagation: the only
    # time an entry waits is the repository's answer delay
    cfg = RouterConfig(cpu_hz=1e15, pit=PitSpec(capacity=1_000_000))
    consumer = Consumer("consumer", PoissonRequests(alpha))
    topo = build_chain(1, 1e14, cfg, consumer=consumer, repository=Repository(delay_us=delay),
                       propagation_us=0, seed=seed)
    series = Simulation(seed).run(topo, [consumer], duration)
    return series.pit_time_average("R1", 1.0, 61.0)


def test_criterion_02_littles_law():
    t = time.perf_counter()
    mean = _poisson_hop(20_000, seed=1)
    wall = time.perf_counter() - t
    ok = abs(mean - 10.0) <= 1.0 and wall < 10
    report(2, ok, f"hop-1 time-averaged PIT {mean:.3f} vs 500/s x 20 ms = 10 (+/-10%), {wall:.1f}s < 10s")


def test_criterion_03_kappa_overestimates():
    t = time.perf_counter()
    predicted = state_from_rate(500.0, RttModel.gamma(0.1, 0.1), kappa=4.0)
    sims = [_poisson_hop(gamma_delay(100_000, 100_000), seed=s) for s in range(1, 6)]
    wall = time.perf_counter() - t
    ok = all(predicted >= s for s in sims) and wall < 30
    report(3, ok, f"predicted {predicted:.1f} >= simulated {[round(s, 1) for s in sims]} on 5/5 seeds, "
                  f"{wall:.1f}s < 30s")


# --------------------------------------------------------------- 4 flood

def test_criterion_04_flood_saturation():
    run = desk_run("flood-nonexistent")
    scn = run.scenario
    cap = scn.router["pit"]["capacity"]
    assert cap == 12_000 and scn.knobs["burst"] == 200 and scn.knobs["total"] == 15_000
    verdict = run.summary.assertions
    peak = run.summary.hops["R1"].pit_peak
    ok = all(verdict.values()) and len(verdict) == 2 and run.wall_s < 60
    report(4, ok, f"peak PIT {peak:.0f} of {cap} ({peak / cap:.3f}); "
                  f"{run.summary.details['retransmissions_keep_rising']}; {run.wall_s:.1f}s < 60s")


# ------------------------------------------------------ 5 parallel download

def test_criterion_05_parallel_download_collapse():
    fast = desk_run("parallel-download-100")
    slow = desk_run("parallel-download-2")
    util_ok, util = evaluate(fast.series, fast.scenario.expected_properties[0])
    spread_fast = fast.summary.completion_std_s
    spread_slow = slow.summary.completion_std_s
    wall = fast.wall_s + slow.wall_s
    ok = util_ok and spread_fast > 4 * spread_slow and wall < 120
    report(5, ok, f"{util}; completion spread {spread_fast:.2f}s vs {spread_slow:.2f}s at the low rate "
                  f"(> 4x); {wall:.1f}s < 120s")


# ------------------------------------------------------------ 6..9 chains

def _retx(run, hops):
    return [run.summary.hops[h].retransmits for h in hops]


def test_criterion_06_homogeneous_chain():
    five = desk_run("chain-homogeneous")
    two = desk_run("chain-homogeneous", hops=2)
    counts = _retx(five, list(five.summary.hops))
    order_ok = retransmit_ordering(counts, 0.05)
    g5, g2 = five.summary.receiver_goodput_bps, two.summary.receiver_goodput_bps
    wall = five.wall_s + two.wall_s
    ok = order_ok and g5 < g2 and wall < 120
    report(6, ok, f"retransmits by hop {[int(c) for c in counts]} non-increasing; goodput 5-hop "
                  f"{g5 / 1e6:.3f} < 2-hop {g2 / 1e6:.3f} Mbit/s; {wall:.1f}s < 120s")


def test_criterion_07_predecessor_memory_spike():
    t = time.perf_counter()
    lines, ok = [], True
    for seed in range(1, 6):
        run = desk_run("chain-weak-25", seed=seed, workload="flood")
        peaks = {h: st.memory_peak for h, st in run.summary.hops.items()}
        top = max(peaks, key=peaks.get)
        others = [v for h, v in peaks.items() if h != "R3"]
        ratio = peaks["R3"] / float(np.median(others))
        ok &= top == "R3" and ratio >= 1.5
        lines.append(f"seed {seed}: argmax {top}, x{ratio:.1f}")
    wall = time.perf_counter() - t
    ok &= wall < 120
    report(7, ok, "; ".join(lines) + f"; {wall:.1f}s < 120s")


def test_criterion_08_regime_flip():
    hom = desk_run("chain-homogeneous")
    w50 = desk_run("chain-weak-50")
    w25 = desk_run("chain-weak-25")
    hops = ["R1", "R2", "R3"]
    base, a, b = _retx(hom, hops), _retx(w50, hops), _retx(w25, hops)
    ok = all(x >= 2 * h and y >= 2 * h for x, y, h in zip(a, b, base))
    ok &= all(max(x, y) / min(x, y) <= 1.5 for x, y in zip(a, b))
    wall = hom.wall_s + w50.wall_s + w25.wall_s
    ok &= wall < 180
    ratios = [f"{x / h:.2f}/{y / h:.2f}" for x, y, h in zip(a, b, base)]
    report(8, ok, f"hops 1-3 retransmits vs homogeneous (50%/25%): {ratios}; {wall:.1f}s < 180s")


def test_criterion_09_alternating_resources():
    hom = desk_run("chain-homogeneous")
    alt = desk_run("chain-alternating")
    g = alt.summary.receiver_goodput_bps / hom.summary.receiver_goodput_bps
    p = alt.summary.max_hop_pit_mean / hom.summary.max_hop_pit_mean
    wall = hom.wall_s + alt.wall_s
    ok = g < 0.5 and 0.5 <= p <= 2.0 and wall < 180
    report(9, ok, f"goodput ratio {g:.3f} < 0.5; max-hop mean PIT ratio {p:.2f} in [0.5, 2]; {wall:.1f}s < 180s")


# ------------------------------------------------------ 10 hash complexity

def _mean_lookup_cost(kind, names, rng_seed=7):
    spec = PitSpec(kind=kind, bucket_count=2048, capacity=100_000)
    pit = make_pit(spec, np.random.default_rng(rng_seed))
    outcomes = []
    for i, nm in enumerate(names):
        res = pit.offer(nm, (0,), 10_000_000, i)
        outcomes.append(res.outcome)
    costs = [pit.lookup(nm, len(names))[1] for nm in names]
    return float(np.mean(costs)), outcomes, pit


def test_criterion_10_hash_complexity_attack():
    t = time.perf_counter()
    n = 10_000
    spec = PitSpec(kind=PitStoreKind.CHAINING, bucket_count=2048)
    evil = adversarial_names(spec, n)
    rng = np.random.default_rng(0)
    rand = [ContentName((b"rnd", b"%016x" % int(x)), 0) for x in rng.integers(0, 1 << 62, n)]
    c_evil, _, _ = _mean_lookup_cost(PitStoreKind.CHAINING, evil)
    c_rand, _, _ = _mean_lookup_cost(PitStoreKind.CHAINING, rand)
    _, outcomes, pit = _mean_lookup_cost(PitStoreKind.COLLISION_OVERWRITE, evil)
    overwrote = sum(o is Outcome.OVERWROTE for o in outcomes)
    # attacker precomputes collisions for a hash drawn from another seed
    other = NameHasher.random(np.random.default_rng(12345))
    guessed = colliding_names(other, 2048, n)
    u_evil, _, _ = _mean_lookup_cost(PitStoreKind.UNIVERSAL, guessed)
    u_rand, _, _ = _mean_lookup_cost(PitStoreKind.UNIVERSAL, rand)
    wall = time.perf_counter() - t
    ok = (c_evil >= 10 * c_rand and overwrote == n - 1 and len(pit) == 1 and evil[0] not in pit
          and u_evil / u_rand < 1.2 and wall < 30)
    report(10, ok, f"chaining lookup cost x{c_evil / c_rand:.0f}; collision-overwrite {overwrote} overwrites, "
                   f"{len(pit)} entry left; universal inflation x{u_evil / u_rand:.3f}; {wall:.1f}s < 30s")


# --------------------------------------------------------- 11 attack catalog

ATTACK_IDS = [sid for sid in SCENARIOS if sid.startswith("attack-")]


def _clean(scn: Scenario) -> Scenario:
    data = scn.to_dict()
    data["attack"] = None
    data["expected_properties"] = []
    data["id"] = scn.id + "-clean"
    return Scenario.from_dict(data)


def test_criterion_11_attack_catalog():
    t = time.perf_counter()
    lines, ok = [], True
    for sid in ATTACK_IDS:
        run = desk_run(sid)
        passed = all(run.summary.assertions.values()) and run.summary.assertions
        ok &= bool(passed)
        lines.append(f"{sid} {'ok' if passed else 'FAILED ' + str(run.summary.details)}")
    scn = get_scenario("attack-intercept", desk=True)
    baseline = timed_run(_clean(scn))
    spied = desk_run("attack-intercept")
    d0 = baseline.series.last("consumer", "data_received")
    d1 = spied.series.last("consumer", "data_received")
    within = abs(d1 - d0) <= 0.1 * d0
    ok &= within
    block = desk_run("attack-mobile-blockade").summary.details["legit_drop_probability_near_one"]
    wall = time.perf_counter() - t
    ok &= wall < 300
    report(11, ok, f"{len(ATTACK_IDS)} attacks: {', '.join(lines)}; intercepted deliveries {d1:.0f} vs "
                   f"clean {d0:.0f}; blockade {block}; {wall:.1f}s < 300s")


# ------------------------------------------------------------ 12 determinism

def test_criterion_12_determinism():
    same, differing = 0, []
    for sid in SCENARIOS:
        first = desk_run(sid)
        again = timed_run(get_scenario(sid, desk=True))
        if first.csv_digest == again.csv_digest:
            same += 1
        else:
            differing.append(sid)
    report(12, not differing, f"{same}/{len(SCENARIOS)} scenarios re-run to byte-identical CSV exports"
                              + (f"; differing: {differing}" if differing else ""))
