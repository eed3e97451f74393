import pytest

from conftest import csv_digest, timed_run
from icnsim.scenarios.attacks import AttackKind, attack_agent, attack_params
from icnsim.scenarios.catalog import SCENARIOS, Scenario, get_scenario, run_scenario


def test_catalog_is_complete():
    assert len(SCENARIOS) == 18
    for sid in SCENARIOS:
        for desk in (False, True):
            scn = get_scenario(sid, desk)
            assert scn.id == sid and len(scn.link_bps) == scn.hops + 1
            assert scn.expected_properties, sid


def test_desk_scale_is_a_tenth():
    full, desk = get_scenario("chain-homogeneous"), get_scenario("chain-homogeneous", True)
    assert desk.link_bps[0] * 10 == full.link_bps[0]
    assert desk.router["cpu_hz"] * 10 == full.router["cpu_hz"]
    assert desk.router["pit"]["capacity"] * 10 == full.router["pit"]["capacity"]
    assert desk.knobs["files"] * 10 == full.knobs["files"]


def test_json_round_trip_gives_identical_run():
    scn = get_scenario("attack-overload", True, duration_s=12.0)
    text = scn.to_json()
    back = Scenario.from_json(text)
    assert back == scn and back.to_json() == text
    assert timed_run(back).csv_digest == timed_run(scn).csv_digest


def test_overload_without_attackers_equals_baseline():
    attacked = get_scenario("attack-overload", True, duration_s=12.0, attack_params={"attackers": 0})
    data = attacked.to_dict()
    data["attack"] = None
    clean = Scenario.from_dict(data)
    assert attacked.expected_properties == []
    assert timed_run(attacked).csv_digest == timed_run(clean).csv_digest


def test_attack_params_reject_unknown_keys():
    with pytest.raises(ValueError, match="bogus"):
        attack_params(AttackKind.JAMMING, {"bogus": 1})
    with pytest.raises(ValueError):
        attack_agent("no-such-attack")
    plan = attack_agent(AttackKind.ROUTE_HIJACK)
    assert plan.agents and plan.properties


def test_flood_below_capacity_plateaus_at_total():
    res = run_scenario(get_scenario("flood-nonexistent", True, total=1000))
    assert res.summary.assertions == {"no_drops_below_capacity": True, "pit_plateau_equals_total": True}
    assert res.summary.hops["R1"].pit_peak == 1000


def _access_backlog(cpu_hz):
    res = run_scenario(get_scenario("flood-nonexistent", True, total=3000, cpu_hz=cpu_hz))
    return res.series.series("R1", "backlog")[1].mean()


def test_doubled_cpu_lowers_backlog():
    # the flood keeps the access router's CPU busy, so its queue reflects CPU speed
    assert _access_backlog(7.2e8) < _access_backlog(3.6e8) < _access_backlog(1.8e8)


def test_completion_time_grows_with_request_rate():
    means = []
    for rate in (0.5, 4.0, 16.0):
        res = run_scenario(get_scenario("parallel-download-10", True, files=12, rate=rate, duration_s=90.0))
        assert res.summary.files_completed == 12
        means.append(res.summary.completion_mean_s)
    assert means == sorted(means) and means[-1] > means[0]


def test_flat_alternating_profile_is_the_homogeneous_chain():
    base = dict(files=8, duration_s=40.0)
    alt = get_scenario("chain-alternating", True, low=1.0, **base)
    assert alt.profiles == {}
    hom = get_scenario("chain-homogeneous", True, **base)
    assert timed_run(alt).csv_digest == timed_run(hom).csv_digest


def test_full_speed_weak_hop_is_balanced():
    res = run_scenario(get_scenario("chain-weak-25", True, workload="flood", cpu_fraction=1.0))
    assert res.summary.assertions == {"no_hop_stands_out": True}


def test_weak_hop_must_be_inside_chain():
    from icnsim.config import ConfigError
    with pytest.raises(ConfigError, match="weak_hop"):
        get_scenario("chain-weak-50", weak_hop=9)


def test_seed_override_changes_run_but_not_scenario():
    scn = get_scenario("attack-hijack", True, duration_s=8.0)
    a, b = run_scenario(scn), run_scenario(scn, seed=2)
    assert b.scenario.seed == 2 and scn.seed == 1
    assert csv_digest(a.series) != csv_digest(b.series)
