"""Adversary agents and their expected effects.

:func:`attack_agent` turns an attack kind plus parameters into an
:class:`AttackPlan`: the extra nodes to wire into a chain, any changes to
routers or the repository, and the properties a run must satisfy.  Attacks
start after a quiet warm-up so every property compares an attack window
against the same run's own baseline window.
"""

from __future__ import annotations

import enum
import math
import zlib
from dataclasses import dataclass, field
from typing import Any, Optional

from ..names import ContentName, DataPacket, Interest, name, to_us
from ..router import CpuProfile, Origin
from ..sim.agents import Consumer, Endpoint, FloodNonexistent, PoissonRequests, Repository
from .properties import prop


class AttackKind(enum.Enum):
    REMOTE_OVERLOAD = "RemoteOverload"
    SLOW_SOURCE = "SlowSource"
    MOBILE_BLOCKADE = "MobileBlockade"
    RATE_LIMIT_FOOLING = "RateLimitFooling"
    INFRINGING_CONTENT_STATES = "InfringingContentStates"
    TIMEOUT_ATTACK = "TimeoutAttack"
    JAMMING = "Jamming"
    ROUTE_HIJACK = "RouteHijack"
    ROUTE_INTERCEPTION = "RouteInterception"


def name_digest(names) -> tuple[int, int]:
    """(count, order-independent checksum) of a set of names."""
    uniq = set(names)
    return len(uniq), sum(zlib.crc32(n.wire) for n in uniq) & 0xFFFFFFFF


# ------------------------------------------------------------------ agents

class _Announcer(Endpoint):
    """Endpoint that can inject routes for ``prefix`` into its access router."""

    def __init__(self, node_id: str, prefix: str = "/repo", face: int = 0):
        super().__init__(node_id)
        self.prefix = name(prefix)
        self.face = face
        #: (router, router face) this node's ``face`` is wired to; set by the builder
        self.access: Optional[tuple] = None

    def announce(self) -> None:
        router, rface = self.access
        router.fib_announce(self.prefix, rface, Origin.announced(self.id))
        self.counters["announcements"] += 1

    def withdraw(self) -> None:
        router, rface = self.access
        router.fib.withdraw(self.prefix, rface)
        self.counters["withdrawals"] += 1


class Blackhole(_Announcer):
    """Announces a prefix at ``at_s`` and silently drops what it attracts."""

    def __init__(self, node_id: str, prefix: str = "/repo", at_s: float = 0.0):
        super().__init__(node_id, prefix)
        self.at_us = to_us(at_s)

    def start(self) -> None:
        self.sim.schedule(self.at_us, self.sim.PRIO_AGENT, self.announce)

    def on_interest(self, face, interest: Interest) -> None:
        self.counters["interests_received"] += 1

    def sample(self) -> dict:
        return {"interests_received": self.counters["interests_received"]}


class FibChurner(_Announcer):
    """Flaps a route: announce/withdraw every ``period_s``, each applied ``convergence_s`` late."""

    def __init__(self, node_id: str, prefix: str = "/repo", start_s: float = 10.0, stop_s: float = 20.0,
                 period_s: float = 0.5, convergence_s: float = 1.0):
        super().__init__(node_id, prefix)
        if period_s <= 0 or convergence_s < 0 or stop_s <= start_s:
            raise ValueError("churn needs period > 0, convergence >= 0, stop > start")
        self.start_us, self.stop_us = to_us(start_s), to_us(stop_s)
        self.period_us, self.delay_us = to_us(period_s), to_us(convergence_s)

    def start(self) -> None:
        sim = self.sim
        t, k = self.start_us, 0
        while t < self.stop_us:
            fn = self.announce if k % 2 == 0 else self.withdraw
            sim.schedule(t + self.delay_us, sim.PRIO_AGENT, fn)
            t += self.period_us
            k += 1
        if k % 2 == 1:
            sim.schedule(self.stop_us + self.delay_us, sim.PRIO_AGENT, self.withdraw)

    def on_interest(self, face, interest: Interest) -> None:
        self.counters["interests_received"] += 1

    def sample(self) -> dict:
        return {"interests_received": self.counters["interests_received"]}


class Interceptor(_Announcer):
    """Attracts a prefix on face 0, relays it unchanged on face 1 and logs every name."""

    def __init__(self, node_id: str, prefix: str = "/repo", at_s: float = 0.0):
        super().__init__(node_id, prefix, face=0)
        self.at_us = to_us(at_s)
        self.log: list[ContentName] = []
        self._seen: set = set()
        self._waiting: set = set()
        self._digest = 0

    def start(self) -> None:
        self.sim.schedule(self.at_us, self.sim.PRIO_AGENT, self.announce)

    def on_interest(self, face, interest: Interest) -> None:
        if face != 0:
            return
        nm = interest.name
        self.counters["interests_received"] += 1
        if nm not in self._seen:
            self._seen.add(nm)
            self.log.append(nm)
            self._digest = (self._digest + zlib.crc32(nm.wire)) & 0xFFFFFFFF
        self._waiting.add(nm)
        self.ports[1].send(interest, self.sim.now)

    def on_data(self, face, data: DataPacket) -> None:
        if face == 1 and data.name in self._waiting:
            self._waiting.discard(data.name)
            self.counters["data_relayed"] += 1
            self.ports[0].send(data, self.sim.now)

    def sample(self) -> dict:
        return {"interests_received": self.counters["interests_received"],
                "data_relayed": self.counters["data_relayed"], "log_count": len(self.log),
                "log_digest": self._digest}


class Jammer(Endpoint):
    """Requests fresh chunks at ``rate`` per second and never keeps or reads them."""

    def __init__(self, node_id: str, rate: float, start_s: float, stop_s: float,
                 prefix: str = "/repo/files"):
        super().__init__(node_id)
        if rate <= 0 or stop_s <= start_s:
            raise ValueError("jammer needs rate > 0 and stop > start")
        self.rate = rate
        self.start_us, self.stop_us = to_us(start_s), to_us(stop_s)
        self.base = name(prefix).child(node_id)
        self.ignored_bits = 0

    def start(self) -> None:
        self.sim.schedule(self.start_us, self.sim.PRIO_AGENT, self._tick, 0)

    def _tick(self, k: int) -> None:
        sim = self.sim
        nm = ContentName(self.base.components + (b"j%d" % k,), 0)
        self.ports[0].send(Interest(nm, sim.next_nonce(), 4000.0, sim.now), sim.now)
        self.counters["interests_sent"] += 1
        at = self.start_us + to_us((k + 1) / self.rate)
        if at < self.stop_us:
            sim.schedule(at, sim.PRIO_AGENT, self._tick, k + 1)

    def on_data(self, face, data: DataPacket) -> None:
        if data.name.components[:len(self.base.components)] == self.base.components:
            self.ignored_bits += data.wire_size * 8

    def sample(self) -> dict:
        return {"interests_sent": self.counters["interests_sent"], "ignored_bits": self.ignored_bits}


class SlowRepository(Repository):
    """Repository that adds ``extra_delay_s`` to every answer from ``slow_from_s`` on."""

    def __init__(self, node_id: str = "repository", *, slow_from_s: float = 10.0,
                 extra_delay_s: float = 3.0, **kwargs):
        super().__init__(node_id, **kwargs)
        self.slow_from_us = to_us(slow_from_s)
        self.extra_us = to_us(extra_delay_s)

    def on_interest(self, face, interest: Interest) -> None:
        if self.sim.now < self.slow_from_us:
            return super().on_interest(face, interest)
        base = self.delay_us
        self.delay_us = (base(self.rng) if callable(base) else (base or 0)) + self.extra_us
        try:
            super().on_interest(face, interest)
        finally:
            self.delay_us = base


# ------------------------------------------------------------------- plans

@dataclass
class Attachment:
    """Wire ``node``'s ``face`` to router hop ``hop`` (1-based) on a fresh router face."""

    node: Endpoint
    hop: int
    face: int = 0


@dataclass
class AttackPlan:
    kind: AttackKind
    attachments: list[Attachment] = field(default_factory=list)
    #: extra agents to start (consumers among the attached nodes)
    agents: list = field(default_factory=list)
    #: node joining the consumer's shared access link instead of a router face
    shared_member: Optional[Endpoint] = None
    profiles: dict[int, CpuProfile] = field(default_factory=dict)
    router_overrides: dict[int, dict] = field(default_factory=dict)
    repository: Optional[Repository] = None
    properties: list[dict] = field(default_factory=list)


#: desk-scale defaults; ``context`` keys come from the enclosing scenario
ATTACK_DEFAULTS: dict[AttackKind, dict[str, Any]] = {
    AttackKind.REMOTE_OVERLOAD: dict(attackers=3, burst=400, pause_s=1.0, total=4000, start_s=10.0, hop=1),
    AttackKind.SLOW_SOURCE: dict(start_s=10.0, extra_delay_s=3.0),
    AttackKind.MOBILE_BLOCKADE: dict(k=None, at_s=10.0, dwell_s=1.0, reissue_s=0.25, hop=1),
    AttackKind.RATE_LIMIT_FOOLING: dict(limit=200.0, attacker_rate=600.0, start_s=10.0, stop_s=20.0, hop=2),
    AttackKind.INFRINGING_CONTENT_STATES: dict(start_s=10.0, stop_s=20.0, period_s=0.5, convergence_s=1.0, hop=1),
    AttackKind.TIMEOUT_ATTACK: dict(start_s=10.0, hops=[2, 3], low=0.04, low_s=7.0, high_s=1.0),
    AttackKind.JAMMING: dict(rate=120.0, start_s=10.0, stop_s=20.0, tolerance=0.1),
    AttackKind.ROUTE_HIJACK: dict(at_s=10.0, hop=1),
    AttackKind.ROUTE_INTERCEPTION: dict(at_s=0.0, hop=1),
}


def attack_kind(kind) -> AttackKind:
    if isinstance(kind, AttackKind):
        return kind
    for k in AttackKind:
        if kind in (k.value, k.name):
            return k
    raise ValueError(f"unknown attack kind {kind!r}")


def attack_params(kind, params: Optional[dict] = None) -> dict:
    """Defaults for ``kind`` overlaid with ``params``; unknown keys are rejected."""
    kind = attack_kind(kind)
    out = dict(ATTACK_DEFAULTS[kind])
    for key, value in (params or {}).items():
        if key not in out:
            raise ValueError(f"{kind.value}: unknown parameter {key!r}")
        out[key] = value
    return out


def attack_agent(kind, params: Optional[dict] = None, context: Optional[dict] = None) -> AttackPlan:
    """Build the adversary for ``kind`` and the properties its run must satisfy.

    ``context`` describes the surrounding scenario: ``hops``, ``duration_s``,
    ``pit_capacity``, ``repository`` (kwargs of the clean repository) and
    ``shared_link`` (name of the consumer access link when shared).
    """
    kind = attack_kind(kind)
    p = attack_params(kind, params)
    ctx = {"hops": 2, "duration_s": 30.0, "pit_capacity": 2000, "repository": {}, "shared_link": "access"}
    ctx.update(context or {})
    return _BUILDERS[kind](p, ctx)


def _rate(node, metric, t0, t1=None):
    return {"node": node, "metric": metric, "window": [t0, t1], "stat": "rate"}


def _delta(node, metric, t0, t1=None):
    return {"node": node, "metric": metric, "window": [t0, t1], "stat": "delta"}


def _remote_overload(p, ctx) -> AttackPlan:
    plan = AttackPlan(AttackKind.REMOTE_OVERLOAD)
    n = int(p["attackers"])
    if n < 0:
        raise ValueError("attackers must be >= 0")
    if n == 0:
        return plan
    victim = f"R{p['hop']}"
    ids = [f"attacker{i}" for i in range(n)]
    for aid in ids:
        c = Consumer(aid, FloodNonexistent(p["burst"], p["pause_s"], p["total"]), start_s=p["start_s"])
        plan.attachments.append(Attachment(c, p["hop"]))
        plan.agents.append(c)
    cap = ctx["pit_capacity"]
    t0 = p["start_s"]
    plan.properties = [
        prop("pit_peak_between", "victim_pit_saturated", node=victim, lo=0.9 * cap, hi=cap),
        prop("ratio_between", "legit_timeouts_increase", num=_rate("consumer", "consumer_retransmits", t0 + 2),
             den=_rate("consumer", "consumer_retransmits", 0.0, t0), lo=5.0, floor=1.0),
        prop("ratio_between", "retransmission_amplification",
             num=_delta(victim, "interests_in", t0), den=_delta(ids, "requests", t0), lo=2.0),
    ]
    return plan


def _slow_source(p, ctx) -> AttackPlan:
    plan = AttackPlan(AttackKind.SLOW_SOURCE)
    plan.repository = SlowRepository(slow_from_s=p["start_s"], extra_delay_s=p["extra_delay_s"],
                                     **ctx["repository"])
    t0 = p["start_s"]
    hops = [f"R{i + 1}" for i in range(ctx["hops"])]
    plan.properties = [
        prop("every_node_ratio_at_least", "pit_rises_on_all_hops", nodes=hops, metric="pit_size",
             during=[t0 + p["extra_delay_s"], None], before=[1.0, t0], min_ratio=5.0, floor=1.0),
    ]
    return plan


def _mobile_blockade(p, ctx) -> AttackPlan:
    plan = AttackPlan(AttackKind.MOBILE_BLOCKADE)
    k = int(p["k"] if p["k"] is not None else ctx["pit_capacity"])
    at, dwell = p["at_s"], p["dwell_s"]
    # offloads a fresh bundle of k names every reissue_s while attached, so
    # slots freed by legitimate Data are taken over by the next bundle
    rounds = max(1, math.ceil(dwell / p["reissue_s"] - 1e-9))
    mobile = Consumer("mobile", FloodNonexistent(burst=k, pause_s=p["reissue_s"], total=k * rounds),
                      retransmit_s=3600.0, start_s=at, stop_s=at + dwell)
    plan.attachments.append(Attachment(mobile, p["hop"]))
    plan.agents.append(mobile)
    timeout = 4.0
    lo, hi = at + dwell + 0.5, at + timeout - 0.2
    props = [prop("value_between", "mobile_offered_all_bundles", spec=_delta("mobile", "requests", 0.0),
                  lo=k * rounds, hi=k * rounds)]
    if k >= ctx["pit_capacity"]:
        rec = at + dwell + timeout + 2.0
        props += [
            # legitimate Interests answered while blocked; drop probability = 1 - ratio
            prop("ratio_between", "legit_drop_probability_near_one",
                 num=_delta("consumer", "data_received", lo, hi), den=_delta("consumer", "interests_sent", lo, hi),
                 hi=0.05),
            prop("ratio_between", "recovers_after_timeout",
                 num=_delta("consumer", "data_received", rec, rec + 3.0),
                 den=_delta("consumer", "interests_sent", rec, rec + 3.0), lo=0.9),
        ]
    plan.properties = props
    return plan


def _rate_limit_fooling(p, ctx) -> AttackPlan:
    from ..router import RateScope

    plan = AttackPlan(AttackKind.RATE_LIMIT_FOOLING)
    plan.router_overrides[p["hop"]] = {"rate_limit": {"max_rate": p["limit"], "scope": RateScope.PER_FACE_PREFIX.value}}
    fooler = Consumer("fooler", PoissonRequests(p["attacker_rate"]), start_s=p["start_s"], stop_s=p["stop_s"])
    # attach below the limiter so both flows share its (face, prefix) bucket
    plan.attachments.append(Attachment(fooler, max(1, p["hop"] - 1)))
    plan.agents.append(fooler)
    t0, t1 = p["start_s"], p["stop_s"]
    plan.properties = [
        prop("ratio_between", "legit_prefix_throttled", num=_rate("consumer", "data_received", t0 + 2, t1),
             den=_rate("consumer", "data_received", 1.0, t0), hi=0.5),
        prop("value_between", "limiter_engaged", spec=_delta(f"R{p['hop']}", "drops_rate_limited", t0, t1), lo=1),
        prop("value_between", "unthrottled_before", spec=_delta(f"R{p['hop']}", "drops_rate_limited", 0.0, t0), hi=0),
    ]
    return plan


def _infringing(p, ctx) -> AttackPlan:
    plan = AttackPlan(AttackKind.INFRINGING_CONTENT_STATES)
    churner = FibChurner("churner", start_s=p["start_s"], stop_s=p["stop_s"], period_s=p["period_s"],
                         convergence_s=p["convergence_s"])
    plan.attachments.append(Attachment(churner, p["hop"]))
    plan.agents.append(churner)
    lo, hi = p["start_s"] + p["convergence_s"], p["stop_s"] + p["convergence_s"]
    plan.properties = [
        prop("ratio_between", "misrouted_fraction_during_churn", num=_delta("churner", "interests_received", lo, hi),
             den=_delta(f"R{p['hop']}", "interests_in", lo, hi), lo=0.25, hi=1.0),
        prop("value_between", "no_misrouting_before", spec=_delta("churner", "interests_received", 0.0, p["start_s"]),
             hi=0),
    ]
    return plan


def timeout_profile(start_s: float, low: float, low_s: float, high_s: float, horizon_s: float) -> CpuProfile:
    """Full speed until ``start_s``, then ``low`` for ``low_s`` / full for ``high_s`` repeatedly."""
    segs, t = [(0, 1.0)], start_s
    while t < horizon_s:
        segs.append((to_us(t), low))
        segs.append((to_us(t + low_s), 1.0))
        t += low_s + high_s
    return CpuProfile(segs)


def _timeout_attack(p, ctx) -> AttackPlan:
    plan = AttackPlan(AttackKind.TIMEOUT_ATTACK)
    hops = list(p["hops"])
    if len(hops) < 2:
        raise ValueError("the timeout attack degrades two or more on-path routers")
    for h in hops:
        if not 1 <= h <= ctx["hops"]:
            raise ValueError(f"hop {h} not in chain")
        plan.profiles[h] = timeout_profile(p["start_s"], p["low"], p["low_s"], p["high_s"], ctx["duration_s"] + 1)
    # expiries anywhere on the path count: state erased before its Data passed
    nodes = [f"R{h + 1}" for h in range(ctx["hops"])]
    t0 = p["start_s"]
    plan.properties = [
        prop("ratio_between", "expiries_before_data_elevated", num=_delta(nodes, "pit_expiries", t0),
             den=_delta(nodes, "pit_expiries", 0.0, t0), lo=20.0, floor=1.0),
    ]
    return plan


def _jamming(p, ctx) -> AttackPlan:
    plan = AttackPlan(AttackKind.JAMMING)
    jammer = Jammer("jammer", p["rate"], p["start_s"], p["stop_s"])
    plan.shared_member = jammer
    plan.agents.append(jammer)
    t0, t1 = p["start_s"], p["stop_s"]
    plan.properties = [
        prop("goodput_drop_matches_share", "goodput_loss_equals_jam_share", node="consumer", jammer="jammer",
             link=ctx["shared_link"], before=[2.0, t0], during=[t0 + 1.0, t1], tolerance=p["tolerance"]),
    ]
    return plan


def _hijack(p, ctx) -> AttackPlan:
    plan = AttackPlan(AttackKind.ROUTE_HIJACK)
    hole = Blackhole("hijacker", at_s=p["at_s"])
    plan.attachments.append(Attachment(hole, p["hop"]))
    plan.agents.append(hole)
    at = p["at_s"]
    plan.properties = [
        prop("value_between", "served_before_hijack", spec=_delta("consumer", "data_received", 0.0, at), lo=1),
        prop("value_between", "no_deliveries_after_hijack", spec=_delta("consumer", "data_received", at + 0.5), hi=0),
        prop("every_node_ratio_at_least", "pending_state_accumulates", nodes=[f"R{p['hop']}"], metric="pit_size",
             during=[at + 2.0, None], before=[1.0, at], min_ratio=5.0, floor=1.0),
    ]
    return plan


def _interception(p, ctx) -> AttackPlan:
    plan = AttackPlan(AttackKind.ROUTE_INTERCEPTION)
    if ctx["hops"] < p["hop"] + 1:
        raise ValueError("interception needs a router beyond the attacked hop")
    spy = Interceptor("interceptor", at_s=p["at_s"])
    plan.attachments.append(Attachment(spy, p["hop"], face=0))
    plan.attachments.append(Attachment(spy, p["hop"] + 1, face=1))
    plan.agents.append(spy)
    whole = [0.0, None]
    plan.properties = [
        prop("equal_values", "attacker_log_count_equals_requests",
             a={"node": "consumer", "metric": "request_log_count", "window": whole, "stat": "last"},
             b={"node": "interceptor", "metric": "log_count", "window": whole, "stat": "last"}),
        prop("equal_values", "attacker_log_digest_equals_requests",
             a={"node": "consumer", "metric": "request_log_digest", "window": whole, "stat": "last"},
             b={"node": "interceptor", "metric": "log_digest", "window": whole, "stat": "last"}),
        prop("ratio_between", "deliveries_unaffected", num=_delta("consumer", "data_received", 0.0),
             den=_delta("consumer", "requests", 0.0), lo=0.9, hi=1.0),
    ]
    return plan


_BUILDERS = {
    AttackKind.REMOTE_OVERLOAD: _remote_overload,
    AttackKind.SLOW_SOURCE: _slow_source,
    AttackKind.MOBILE_BLOCKADE: _mobile_blockade,
    AttackKind.RATE_LIMIT_FOOLING: _rate_limit_fooling,
    AttackKind.INFRINGING_CONTENT_STATES: _infringing,
    AttackKind.TIMEOUT_ATTACK: _timeout_attack,
    AttackKind.JAMMING: _jamming,
    AttackKind.ROUTE_HIJACK: _hijack,
    AttackKind.ROUTE_INTERCEPTION: _interception,
}
