"""Named experiment scenarios as plain data, plus the builder that wires them.

A :class:`Scenario` holds only numbers, strings, lists and dicts, so it
serializes to JSON and reloads into an identical run.  Each id in
:data:`SCENARIOS` maps to a factory taking ``desk`` (small-machine scale) and
keyword overrides ("knobs"); :func:`get_scenario` validates the overrides.

Desk scale divides link rates, CPU speeds, PIT capacities, file counts and
request rates by ten; timers stay as they are.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from ..config import ConfigError, validate
from ..metrics import MetricsSeries, RunSummary, summarize
from ..names import name
from ..pit import PitSpec, PitStoreKind
from ..router import CpuProfile, RateLimit, RateScope, Router, RouterConfig
from ..sim.agents import BulkDownload, Consumer, FloodNonexistent, PoissonRequests, Repository
from ..sim.engine import Simulation
from ..sim.topology import DOWN, UP, LinkSpec, Topology
from .attacks import AttackKind, AttackPlan, attack_agent, attack_kind, attack_params
from .properties import prop

ACCESS_LINK = "access"

# Reference results of the desk homogeneous 5-hop chain (seed 1, 300 s); the
# single-run properties of the weak and alternating chains compare to them.
HOMOGENEOUS_REFERENCE = {"retransmits": 185_000, "goodput_bps": 3.745e6, "completion_s": 124.9}


@dataclass
class Scenario:
    id: str
    hops: int
    duration_s: float
    seed: int = 1
    sample_interval_s: float = 0.1
    #: one capacity per link, consumer side first (hops + 1 entries)
    link_bps: list = field(default_factory=list)
    propagation_us: int = 1000
    #: RouterConfig keyword arguments; "pit" and "rate_limit" are nested dicts
    router: dict = field(default_factory=dict)
    #: per-hop router overrides, keyed by hop number as a string
    hop_router: dict = field(default_factory=dict)
    #: per-hop CPU profile segments [[start_us, fraction], ...]
    profiles: dict = field(default_factory=dict)
    #: {"workload": {"kind": ..., **params}, **Consumer kwargs}
    consumer: dict = field(default_factory=dict)
    repository: dict = field(default_factory=dict)
    #: {"kind": AttackKind value, "params": {...}} or None
    attack: Optional[dict] = None
    shared_access: bool = False
    desk: bool = False
    knobs: dict = field(default_factory=dict)
    expected_properties: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        return cls(**copy.deepcopy(data))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))

    def with_seed(self, seed: int) -> "Scenario":
        out = Scenario.from_dict(self.to_dict())
        out.seed = seed
        out.knobs["seed"] = seed
        return out


# ------------------------------------------------------------------ knobs

def _positive(x):
    return x > 0


def _non_negative(x):
    return x >= 0


def _fraction(x):
    return 0 < x <= 1


_NUM = (int, float)

#: knob -> (types, predicate, hint) for override validation
KNOB_SCHEMA: dict[str, tuple] = {
    "seed": (int, _non_negative, "an integer >= 0"),
    "duration_s": (_NUM, _positive, "a number > 0"),
    "sample_interval_s": (_NUM, _positive, "a number > 0"),
    "hops": (int, _positive, "an integer >= 1"),
    "link_bps": (_NUM, _positive, "a number > 0"),
    "propagation_us": (int, _non_negative, "an integer >= 0"),
    "cpu_hz": (_NUM, _positive, "a number > 0"),
    "pipeline_cycles": (int, _non_negative, "an integer >= 0"),
    "per_byte_cycles": (_NUM, _non_negative, "a number >= 0"),
    "forward_refreshes": (bool, None, "true or false"),
    "rx_window": (int, _positive, "an integer >= 1"),
    "pit_capacity": (int, _positive, "an integer >= 1"),
    "pit_kind": (str, lambda s: s in {k.value for k in PitStoreKind}, "a PIT kind"),
    "interest_timeout_s": (_NUM, _positive, "a number > 0"),
    "service_us": (_NUM, _non_negative, "a number >= 0"),
    "jitter": (_NUM, lambda x: 0 <= x < 1, "a number in [0, 1)"),
    "files": (int, _non_negative, "an integer >= 0"),
    "rate": (_NUM, _positive, "a number > 0"),
    "file_size": (int, _positive, "an integer >= 1"),
    "window": (int, _positive, "an integer >= 1"),
    "arrivals": (str, lambda s: s in ("periodic", "poisson"), "periodic or poisson"),
    "burst": (int, _positive, "an integer >= 1"),
    "pause_s": (_NUM, _positive, "a number > 0"),
    "total": (int, _non_negative, "an integer >= 0"),
    "workload": (str, lambda s: s in ("bulk", "flood"), "bulk or flood"),
    "cpu_fraction": (_NUM, _fraction, "a number in (0, 1]"),
    "weak_hop": (int, _positive, "an integer >= 1"),
    "low": (_NUM, _fraction, "a number in (0, 1]"),
    "low_s": (_NUM, _positive, "a number > 0"),
    "high_s": (_NUM, _positive, "a number > 0"),
    "offset_s": (_NUM, _non_negative, "a number >= 0"),
    "alternating_hops": (list, lambda v: all(isinstance(h, int) and h >= 1 for h in v), "a list of hop numbers"),
    "alpha": (_NUM, _non_negative, "a number >= 0"),
    "attack_params": (dict, None, "a dict of attack parameters"),
}


def _router_knobs(desk: bool, cpu_desk: float = 2.4e8) -> dict:
    return dict(cpu_hz=cpu_desk if desk else 2.4e9, pipeline_cycles=80_000, per_byte_cycles=64,
                forward_refreshes=True, rx_window=64, pit_kind=PitStoreKind.CHAINING.value,
                interest_timeout_s=4.0)


def _base_knobs(desk: bool) -> dict:
    return dict(seed=1, sample_interval_s=0.1, link_bps=10e6 if desk else 100e6, propagation_us=1000,
                jitter=0.1, **_router_knobs(desk))


def _bulk_knobs(desk: bool) -> dict:
    k = _base_knobs(desk)
    k.update(pit_capacity=100_000 if desk else 1_000_000, service_us=8333.0 if desk else 833.3,
             files=50 if desk else 500, rate=10.0 if desk else 100.0, file_size=1_250_000, window=32,
             arrivals="periodic")
    return k


def _flood_knobs(desk: bool) -> dict:
    k = _base_knobs(desk)
    k.update(cpu_hz=3.6e8 if desk else 2.4e9, pit_capacity=12_000 if desk else 120_000,
             service_us=8333.0 if desk else 833.3, burst=200 if desk else 2000, pause_s=2.0 if desk else 6.0,
             total=15_000 if desk else 150_000)
    return k


def _flood_duration(k: dict) -> float:
    bursts = -(-k["total"] // k["burst"]) if k["total"] else 0
    return max(bursts - 1, 0) * k["pause_s"] + 35.0


def _merge(defaults: dict, overrides: dict, sid: str) -> dict:
    allowed = {key: KNOB_SCHEMA[key] for key in defaults}
    try:
        clean = validate(overrides, allowed)
    except ConfigError as exc:
        raise ConfigError(f"{sid}: {exc}") from None
    out = dict(defaults)
    out.update({key: v for key, v in clean.items() if v is not None})
    return out


def _router_dict(k: dict) -> dict:
    return {"cpu_hz": float(k["cpu_hz"]), "pipeline_cycles": k["pipeline_cycles"],
            "per_byte_cycles": float(k["per_byte_cycles"]), "forward_refreshes": k["forward_refreshes"],
            "rx_window": k["rx_window"], "interest_timeout_s": float(k["interest_timeout_s"]),
            "pit": {"kind": k["pit_kind"], "capacity": k["pit_capacity"]}}


def _repository_dict(k: dict) -> dict:
    return {"service_us": float(k["service_us"]), "dedup": True}


def _bulk_workload(k: dict) -> dict:
    return {"kind": "bulk", "files": k["files"], "rate": float(k["rate"]), "file_size": k["file_size"],
            "window": k["window"], "arrivals": k["arrivals"]}


def _flood_workload(k: dict) -> dict:
    return {"kind": "flood", "burst": k["burst"], "pause_s": float(k["pause_s"]), "total": k["total"]}


def _scenario(sid: str, k: dict, desk: bool, workload: dict, duration_s: float, **extra) -> Scenario:
    hops = k["hops"]
    link = k["link_bps"]
    return Scenario(id=sid, hops=hops, duration_s=float(duration_s), seed=k["seed"],
                    sample_interval_s=float(k["sample_interval_s"]), link_bps=[float(link)] * (hops + 1),
                    propagation_us=k["propagation_us"], router=_router_dict(k),
                    consumer={"workload": workload, "jitter": float(k["jitter"])},
                    repository=_repository_dict(k), desk=desk, knobs=dict(k), **extra)


def _segments(profile: CpuProfile) -> list:
    return [[int(t), float(f)] for t, f in profile.segments]


def _hops(n: int, skip: tuple = ()) -> list[str]:
    return [f"R{i}" for i in range(1, n + 1) if i not in skip]


# -------------------------------------------------------------- factories

def flood_nonexistent(desk: bool = False, **overrides) -> Scenario:
    """Bursts of never-answered Interests fill the access router's PIT."""
    sid = "flood-nonexistent"
    k = _merge({**_flood_knobs(desk), "hops": 2, "duration_s": None}, overrides, sid)
    duration = k["duration_s"] or _flood_duration(k)
    k["duration_s"] = duration
    cap, total = k["pit_capacity"], k["total"]
    bursts = -(-total // k["burst"]) if total else 0
    last = max(bursts - 1, 0) * k["pause_s"]
    if total < 0.9 * cap:
        props = [prop("no_drops", "no_drops_below_capacity"),
                 prop("pit_plateau", "pit_plateau_equals_total", node="R1", value=total,
                      window=[last + 1.0, None])]
    else:
        props = [prop("pit_peak_between", "pit_peak_near_capacity", node="R1", lo=0.9 * cap, hi=cap),
                 prop("counter_keeps_rising", "retransmissions_keep_rising", node="R1",
                      metric="interest_retransmits", t0=last, seconds=30, min_per_s=1.0)]
    return _scenario(sid, k, desk, _flood_workload(k), duration, expected_properties=props)


def _download_factory(full_rate: float) -> Callable[..., Scenario]:
    sid = f"parallel-download-{full_rate:g}"

    def factory(desk: bool = False, **overrides) -> Scenario:
        files = 300 if full_rate == 2 else 500
        defaults = {**_bulk_knobs(desk), "hops": 2, "duration_s": None,
                    "rate": full_rate / 10 if desk else float(full_rate), "files": files // 10 if desk else files}
        k = _merge(defaults, overrides, sid)
        duration = k["duration_s"] or max(300.0, k["files"] / k["rate"] + 60.0)
        k["duration_s"] = duration
        props = []
        if full_rate == 2:
            props = [prop("all_files_complete", "all_files_complete"),
                     prop("completion_cv_below", "completion_spread_small", max_cv=0.25)]
        elif full_rate == 100:
            props = [prop("link_utilization_below", "receiver_link_underused", link="R1->consumer",
                          capacity_bps=float(k["link_bps"]), max_fraction=0.5)]
        else:
            props = [prop("all_files_complete", "all_files_complete")]
        return _scenario(sid, k, desk, _bulk_workload(k), duration, expected_properties=props)

    factory.__name__ = f"parallel_download_{full_rate:g}"
    factory.__doc__ = f"Two-hop chain; files requested at {full_rate:g}/s (desk: /10)."
    return factory


def chain_homogeneous(desk: bool = False, **overrides) -> Scenario:
    """Five identical routers carrying the bulk download."""
    sid = "chain-homogeneous"
    k = _merge({**_bulk_knobs(desk), "hops": 5, "duration_s": 300.0}, overrides, sid)
    props = [prop("retransmits_non_increasing", "retransmits_non_increasing_toward_source")]
    if k["files"] == 0:
        props.append(prop("zero_retransmits", "zero_load_zero_retransmits"))
    return _scenario(sid, k, desk, _bulk_workload(k), k["duration_s"], expected_properties=props)


def _weak_factory(percent: int) -> Callable[..., Scenario]:
    sid = f"chain-weak-{percent}"

    def factory(desk: bool = False, **overrides) -> Scenario:
        workload = overrides.get("workload") or "bulk"
        base = _flood_knobs(desk) if workload == "flood" else _bulk_knobs(desk)
        defaults = {**base, "hops": 5, "duration_s": 45.0 if workload == "flood" else 300.0,
                    "workload": "bulk", "cpu_fraction": percent / 100, "weak_hop": 4}
        if workload == "bulk":
            for key in ("burst", "pause_s", "total"):
                defaults.pop(key, None)
        k = _merge(defaults, overrides, sid)
        hops, weak, frac = k["hops"], k["weak_hop"], float(k["cpu_fraction"])
        if not 1 < weak <= hops:
            raise ConfigError(f"{sid}: weak_hop: expected a hop in 2..{hops}, got {weak}")
        profiles = {str(weak): _segments(CpuProfile.constant(frac))} if frac < 1 else {}
        scale = 1 if desk else 10
        if frac >= 1:
            props = [prop("memory_balanced", "no_hop_stands_out", max_excess=0.5)]
        elif workload == "flood":
            props = [prop("memory_argmax", "predecessor_memory_maximal", hop=f"R{weak - 1}", min_ratio=1.5)]
        else:
            ref = HOMOGENEOUS_REFERENCE["retransmits"] * scale
            props = [prop("retransmits_at_least", "retransmits_twice_homogeneous",
                          hops=_hops(weak - 1), min_count=2 * ref)]
        wl = _flood_workload(k) if workload == "flood" else _bulk_workload(k)
        return _scenario(sid, k, desk, wl, k["duration_s"], profiles=profiles, expected_properties=props)

    factory.__name__ = f"chain_weak_{percent}"
    factory.__doc__ = f"Five-hop chain whose hop 4 runs at {percent}% CPU."
    return factory


def chain_alternating(desk: bool = False, **overrides) -> Scenario:
    """Hops 2 to 4 alternate between full and low CPU, staggered in phase."""
    sid = "chain-alternating"
    defaults = {**_bulk_knobs(desk), "hops": 5, "duration_s": 400.0, "low": 0.1, "low_s": 30.0,
                "high_s": 30.0, "offset_s": 15.0, "alternating_hops": [2, 3, 4]}
    k = _merge(defaults, overrides, sid)
    profiles = {}
    for i, h in enumerate(k["alternating_hops"]):
        if h > k["hops"]:
            raise ConfigError(f"{sid}: alternating_hops: hop {h} not in a {k['hops']}-hop chain")
        wave = CpuProfile.square_wave(float(k["low"]), k["low_s"], k["high_s"], offset_s=k["offset_s"] * i,
                                      horizon_s=k["duration_s"] + 1)
        if len(wave.segments) > 1 or wave.segments[0][1] != 1.0:
            profiles[str(h)] = _segments(wave)
    scale = 1 if desk else 10
    props = []
    if profiles:
        props = [prop("goodput_below", "goodput_below_half_homogeneous",
                      max_bps=0.5 * HOMOGENEOUS_REFERENCE["goodput_bps"] * scale),
                 prop("completion_mean_at_least", "completion_three_times_homogeneous",
                      min_s=3 * HOMOGENEOUS_REFERENCE["completion_s"])]
    return _scenario(sid, k, desk, _bulk_workload(k), k["duration_s"], profiles=profiles,
                     expected_properties=props)


def _attack_knobs() -> dict:
    k = _base_knobs(True)
    k.update(hops=2, duration_s=30.0, pipeline_cycles=40_000, pit_capacity=2000, service_us=2000.0,
             alpha=50.0, attack_params={})
    return k


def _attack_factory(kind: AttackKind, sid: str) -> Callable[..., Scenario]:
    def factory(desk: bool = False, **overrides) -> Scenario:
        defaults = _attack_knobs()
        if kind is AttackKind.TIMEOUT_ATTACK:
            defaults["hops"] = 3
        if kind is AttackKind.JAMMING:
            defaults.update(files=1, rate=1.0, file_size=40_000_000, window=32, arrivals="periodic")
            defaults.pop("alpha")
        k = _merge(defaults, overrides, sid)
        try:
            params = attack_params(kind, k["attack_params"])
        except ValueError as exc:
            raise ConfigError(f"{sid}: attack_params: {exc}") from None
        if kind is AttackKind.JAMMING:
            workload = _bulk_workload(k)
        else:
            workload = {"kind": "poisson", "alpha": float(k["alpha"])}
        scn = _scenario(sid, k, desk, workload, k["duration_s"],
                        attack={"kind": kind.value, "params": _plain(params)},
                        shared_access=kind is AttackKind.JAMMING)
        if kind is AttackKind.JAMMING:
            # only the shared access segment is slow; the rest of the path is not the bottleneck
            scn.link_bps = [float(k["link_bps"])] + [10 * float(k["link_bps"])] * scn.hops
        if kind is AttackKind.ROUTE_INTERCEPTION:
            scn.consumer.update(keep_log=True, stop_s=float(k["duration_s"]) - 2.0)
        scn.expected_properties = _plan(scn).properties
        return scn

    factory.__name__ = sid.replace("-", "_")
    factory.__doc__ = f"{kind.value} against a short chain with Poisson background requests."
    return factory


def _plain(value):
    return json.loads(json.dumps(value))


SCENARIOS: dict[str, Callable[..., Scenario]] = {
    "flood-nonexistent": flood_nonexistent,
    "parallel-download-2": _download_factory(2),
    "parallel-download-10": _download_factory(10),
    "parallel-download-100": _download_factory(100),
    "chain-homogeneous": chain_homogeneous,
    "chain-weak-100": _weak_factory(100),
    "chain-weak-50": _weak_factory(50),
    "chain-weak-25": _weak_factory(25),
    "chain-alternating": chain_alternating,
    "attack-overload": _attack_factory(AttackKind.REMOTE_OVERLOAD, "attack-overload"),
    "attack-slow-source": _attack_factory(AttackKind.SLOW_SOURCE, "attack-slow-source"),
    "attack-mobile-blockade": _attack_factory(AttackKind.MOBILE_BLOCKADE, "attack-mobile-blockade"),
    "attack-rate-limit": _attack_factory(AttackKind.RATE_LIMIT_FOOLING, "attack-rate-limit"),
    "attack-state-infringe": _attack_factory(AttackKind.INFRINGING_CONTENT_STATES, "attack-state-infringe"),
    "attack-timeout": _attack_factory(AttackKind.TIMEOUT_ATTACK, "attack-timeout"),
    "attack-jamming": _attack_factory(AttackKind.JAMMING, "attack-jamming"),
    "attack-hijack": _attack_factory(AttackKind.ROUTE_HIJACK, "attack-hijack"),
    "attack-intercept": _attack_factory(AttackKind.ROUTE_INTERCEPTION, "attack-intercept"),
}


def scenario_knobs(sid: str, desk: bool = False) -> dict:
    """Resolved knob values (keys accepted as overrides) of scenario ``sid``."""
    return dict(get_scenario(sid, desk).knobs)


def knob_schema(sid: str, desk: bool = False) -> dict:
    return {key: KNOB_SCHEMA[key] for key in scenario_knobs(sid, desk)}


def get_scenario(sid: str, desk: bool = False, **overrides) -> Scenario:
    if sid not in SCENARIOS:
        raise KeyError(f"unknown scenario {sid!r}; try one of: {', '.join(SCENARIOS)}")
    return SCENARIOS[sid](desk, **overrides)


# ---------------------------------------------------------------- building

@dataclass
class Built:
    topology: Topology
    agents: list
    consumer: Consumer
    plan: Optional[AttackPlan] = None


def _workload(spec: dict):
    spec = dict(spec)
    kind = spec.pop("kind")
    kinds = {"bulk": BulkDownload, "flood": FloodNonexistent, "poisson": PoissonRequests}
    if kind not in kinds:
        raise ValueError(f"unknown workload kind {kind!r}")
    return kinds[kind](**spec)


def _deep_update(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_update(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def router_config(spec: dict) -> RouterConfig:
    """RouterConfig from the plain-data form used in scenarios."""
    kw = dict(spec)
    pit = dict(kw.pop("pit", {}))
    if "kind" in pit:
        pit["kind"] = PitStoreKind(pit["kind"])
    kw["pit"] = PitSpec(**pit)
    rl = kw.pop("rate_limit", None)
    if rl:
        rl = dict(rl)
        if "scope" in rl:
            rl["scope"] = RateScope(rl["scope"])
        kw["rate_limit"] = RateLimit(**rl)
    return RouterConfig(**kw)


def _plan(scn: Scenario) -> Optional[AttackPlan]:
    if not scn.attack:
        return None
    pit = scn.router.get("pit", {})
    context = {"hops": scn.hops, "duration_s": scn.duration_s,
               "pit_capacity": pit.get("capacity", PitSpec().capacity),
               "repository": dict(scn.repository), "shared_link": ACCESS_LINK}
    return attack_agent(attack_kind(scn.attack["kind"]), scn.attack.get("params"), context)


def build(scn: Scenario) -> Built:
    """Instantiate the topology and agents of ``scn`` (fresh objects every call)."""
    n = scn.hops
    if len(scn.link_bps) != n + 1:
        raise ValueError(f"{scn.id}: link_bps needs {n + 1} entries")
    plan = _plan(scn)
    cons = dict(scn.consumer)
    consumer = Consumer("consumer", _workload(cons.pop("workload")), **cons)
    repository = plan.repository if plan and plan.repository else Repository("repository", **scn.repository)

    topo = Topology()
    topo.add_node(consumer)
    routers = []
    for i in range(n):
        hop = i + 1
        spec = _deep_update(scn.router, scn.hop_router.get(str(hop), {}))
        if plan:
            spec = _deep_update(spec, plan.router_overrides.get(hop, {}))
        segs = scn.profiles.get(str(hop))
        profile = CpuProfile([tuple(s) for s in segs]) if segs else None
        if plan and hop in plan.profiles:
            profile = plan.profiles[hop]
        rng = np.random.default_rng(np.random.SeedSequence(scn.seed, spawn_key=(hop,)))
        r = Router(f"R{hop}", router_config(spec), rng, profile)
        topo.add_node(r)
        routers.append(r)
    topo.add_node(repository)

    prop_us = scn.propagation_us
    access = LinkSpec(scn.link_bps[0], prop_us)
    member = plan.shared_member if plan else None
    if scn.shared_access or member is not None:
        members = [(consumer, 0), (routers[0], DOWN)]
        if member is not None:
            topo.add_node(member)
            members.insert(1, (member, 0))
        topo.shared(members, access, link_name=ACCESS_LINK)
    else:
        topo.connect(consumer, 0, routers[0], DOWN, access)
    for i in range(n - 1):
        topo.connect(routers[i], UP, routers[i + 1], DOWN, LinkSpec(scn.link_bps[i + 1], prop_us))
    topo.connect(routers[-1], UP, repository, 0, LinkSpec(scn.link_bps[n], prop_us))
    for r in routers:
        r.add_route(name("/repo"), UP)

    if plan:
        for att in plan.attachments:
            if not 1 <= att.hop <= n:
                raise ValueError(f"{scn.id}: attachment to hop {att.hop} outside the chain")
            router = routers[att.hop - 1]
            if att.node.id not in topo.nodes:
                topo.add_node(att.node)
            rface = max(2, max(router.ports) + 1)
            topo.connect(att.node, att.face, router, rface, access)
            if hasattr(att.node, "access") and att.face == getattr(att.node, "face", 0):
                att.node.access = (router, rface)
    agents = [consumer] + (list(plan.agents) if plan else [])
    return Built(topo, agents, consumer, plan)


@dataclass
class RunResult:
    scenario: Scenario
    series: MetricsSeries
    summary: RunSummary
    built: Built
    events: int = 0


def run_scenario(scn: Scenario, seed: Optional[int] = None) -> RunResult:
    """Build and run ``scn`` (optionally under another seed) and evaluate its properties."""
    if seed is not None and seed != scn.seed:
        scn = scn.with_seed(seed)
    built = build(scn)
    sim = Simulation(scn.seed, scn.sample_interval_s)
    series = sim.run(built.topology, built.agents, scn.duration_s)
    series.meta.update(scenario=scn.id, seed=scn.seed, desk=scn.desk)
    summary = summarize(series, scn.expected_properties)
    return RunResult(scn, series, summary, built, sim.events)
