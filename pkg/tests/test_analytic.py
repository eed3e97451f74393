import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icnsim.analytic import (RttModel, estimate, memory_requirement, optimal_rate_limit,
                             rate_limit_utilization_gap, sizing_table, state_from_rate,
                             state_from_utilization, states_table)

# Reference moments of min(RTT, T), integrated separately at 30 digits and frozen here.
FROZEN_CLIPPED = [
    # (mean, std, timeout, E[min], std[min])
    (1.0, 0.5, 1.2, 0.876817146170268, 0.301868722046545),
    (0.25, 0.25, 0.5, 0.216166179190847, 0.165895906400070),
]
# truncated Gamma(mean 1, std 0.5) at 1.5, renormalized
FROZEN_TRUNCATED = (0.842302980864412, 0.326892774169237)


@pytest.mark.parametrize("mean,std,timeout,m,s", FROZEN_CLIPPED)
def test_clipped_moments_match_reference(mean, std, timeout, m, s):
    got = RttModel.gamma(mean, std).clipped_moments(timeout)
    assert got == pytest.approx((m, s), rel=1e-7)


def test_exponential_clip_closed_form():
    # shape 1: E[min(X, T)] = theta * (1 - exp(-T / theta))
    theta, t = 0.25, 0.5
    m, _ = RttModel.gamma(theta, theta).clipped_moments(t)
    assert m == pytest.approx(theta * (1 - math.exp(-t / theta)), rel=1e-9)


def test_truncated_gamma_moments():
    assert RttModel.gamma(1.0, 0.5, cap=1.5).moments() == pytest.approx(FROZEN_TRUNCATED, rel=1e-7)


def test_unclipped_moments_are_the_parameters():
    assert RttModel.gamma(0.3, 0.1).clipped_moments() == pytest.approx((0.3, 0.1), rel=1e-7)


def test_deterministic_state_is_alpha_times_rtt():
    rtt = RttModel.deterministic(0.2)
    assert state_from_rate(1000, rtt) == pytest.approx(200.0)
    assert state_from_rate(1000, rtt, timeout=0.05) == pytest.approx(50.0)
    assert state_from_rate(0, rtt) == 0.0


def test_gamma_state_estimate():
    assert state_from_rate(500, RttModel.gamma(0.1, 0.1), kappa=4) == pytest.approx(250.0, rel=1e-7)
    est = estimate(100, RttModel.deterministic(0.1))
    assert est.mean_states == pytest.approx(10.0) and est.utilization == 100 * 8000


def test_utilization_form_agrees_with_rate_form():
    rtt = RttModel.gamma(0.25, 0.1)
    assert state_from_utilization(8e6, 8000, rtt) == pytest.approx(state_from_rate(1000, rtt))


def test_memory_requirement_is_linear():
    assert memory_requirement(1e9) == pytest.approx(156_250)
    assert memory_requirement(100e9) == pytest.approx(15_625_000)
    assert [n for _, n in sizing_table([8000, 16000])] == pytest.approx([1.25, 2.5])


def test_optimal_rate_limit():
    rtt = RttModel.gamma(0.2, 0.1)
    assert optimal_rate_limit(1e9, rtt) == pytest.approx(1e9 * 0.2 / 8000)


def test_rate_limit_tuned_to_mean_misses_capacity():
    rtt = RttModel.gamma(0.2, 0.15)
    limit = optimal_rate_limit(1e8, rtt)
    gap = rate_limit_utilization_gap(limit, rtt, 1e8, trials=20_000)
    # Jensen: E[1/RTT] > 1/E[RTT], so the average demand overshoots while carried load falls short
    assert gap["mean_demand"] > 1.0 and gap["mean_util"] < 1.0
    assert gap["p5"] < 1.0 < gap["p95"] and 0 < gap["overload_fraction"] < 1
    det = rate_limit_utilization_gap(limit, RttModel.deterministic(0.2), 1e8, trials=100)
    assert det["mean_util"] == pytest.approx(1.0)


def test_validation():
    for bad in [lambda: RttModel.gamma(0.0, 1.0), lambda: RttModel.gamma(1.0, 0.0),
                lambda: state_from_rate(-1, RttModel.deterministic(1)),
                lambda: state_from_rate(1, RttModel.deterministic(1), timeout=0),
                lambda: memory_requirement(-1)]:
        with pytest.raises(ValueError):
            bad()


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(0.05, 2.0), st.floats(0.01, 5.0))
def test_clipping_never_increases_the_mean(mean, cv, timeout):
    rtt = RttModel.gamma(mean, mean * cv)
    m, s = rtt.clipped_moments(timeout)
    assert 0 < m <= min(mean, timeout) * (1 + 1e-6)
    assert s >= 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1e5), st.floats(0, 1e5), st.floats(0, 8))
def test_states_monotone_in_rate(a, b, kappa):
    rtt = RttModel.gamma(0.25, 0.25)
    lo, hi = sorted((a, b))
    assert state_from_rate(lo, rtt, kappa) <= state_from_rate(hi, rtt, kappa) + 1e-9


def test_truncated_sampler_respects_cap():
    draws = RttModel.gamma(1.0, 0.5, cap=1.5).sample(np.random.default_rng(0), 5000)
    assert draws.max() <= 1.5
    assert draws.mean() == pytest.approx(FROZEN_TRUNCATED[0], rel=0.03)


def test_states_table_default_rtt():
    rows = states_table([100])
    assert rows[0][1] == pytest.approx(100 * (0.25 + 4 * 0.25), rel=1e-6)
