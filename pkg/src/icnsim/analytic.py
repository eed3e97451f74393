"""Closed-form state sizing: PIT states from request rate, link utilization
and line rate, plus the rate-limit utilization gap.

RTT models are in seconds.  ``min(RTT, T)`` moments are integrated
numerically over the Gamma density.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, stats

DEFAULT_KAPPA = 4.0
#: seconds of state per bit of line rate: 1.25 s / 8,000 bit
STATE_SECONDS = 1.25
PACKET_BITS = 8000.0


class RttKind(enum.Enum):
    DETERMINISTIC = "deterministic"
    GAMMA = "gamma"


@dataclass(frozen=True)
class RttModel:
    """Round-trip time distribution; ``cap`` truncates (and renormalizes) it."""

    kind: RttKind
    mean: float
    std: float = 0.0
    cap: Optional[float] = None

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError("RTT mean must be positive")
        if self.std < 0:
            raise ValueError("RTT std must be >= 0")
        if self.kind is RttKind.GAMMA and self.std == 0:
            raise ValueError("a Gamma RTT needs std > 0; use a deterministic one")
        if self.cap is not None and not self.cap > 0:
            raise ValueError("cap must be positive")

    @classmethod
    def deterministic(cls, rtt: float) -> "RttModel":
        return cls(RttKind.DETERMINISTIC, rtt)

    @classmethod
    def gamma(cls, mean: float, std: float, cap: Optional[float] = None) -> "RttModel":
        return cls(RttKind.GAMMA, mean, std, cap)

    @property
    def shape(self) -> float:
        return (self.mean / self.std) ** 2

    @property
    def scale(self) -> float:
        return self.std ** 2 / self.mean

    def _dist(self):
        return stats.gamma(self.shape, scale=self.scale)

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind is RttKind.DETERMINISTIC:
            x = self.mean if self.cap is None else min(self.mean, self.cap)
            return np.full(size, x) if size is not None else x
        if self.cap is None:
            return rng.gamma(self.shape, self.scale, size)
        # inverse-CDF draw from the truncated law
        d = self._dist()
        top = d.cdf(self.cap)
        u = rng.uniform(0.0, top, size)
        return d.ppf(u)

    def clipped_moments(self, timeout: float = math.inf) -> tuple[float, float]:
        """Mean and standard deviation of ``min(RTT, timeout)``."""
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.kind is RttKind.DETERMINISTIC:
            x = self.mean if self.cap is None else min(self.mean, self.cap)
            return min(x, timeout), 0.0
        d = self._dist()
        hi = self.cap if self.cap is not None else math.inf
        mass = d.cdf(hi) if self.cap is not None else 1.0
        edge = min(timeout, hi)
        pdf = d.pdf
        # split at the mode so quad sees the peak
        mode = max(0.0, (self.shape - 1.0) * self.scale)
        pts = [p for p in (mode,) if 0.0 < p < edge] if math.isfinite(edge) else None

        def part(fn):
            if math.isfinite(edge):
                return integrate.quad(fn, 0.0, edge, points=pts, limit=200)[0]
            lower = integrate.quad(fn, 0.0, max(mode, self.mean), limit=200)[0]
            return lower + integrate.quad(fn, max(mode, self.mean), math.inf, limit=200)[0]

        m1 = part(lambda x: x * pdf(x)) / mass
        m2 = part(lambda x: x * x * pdf(x)) / mass
        if timeout < hi:
            tail = (d.sf(timeout) - (d.sf(hi) if self.cap is not None else 0.0)) / mass
            m1 += timeout * tail
            m2 += timeout * timeout * tail
        var = max(0.0, float(m2 - m1 * m1))
        return float(m1), math.sqrt(var)

    def moments(self) -> tuple[float, float]:
        """Mean and standard deviation of the RTT itself."""
        if self.cap is None:
            return self.mean, self.std
        return self.clipped_moments()


@dataclass
class StateEstimate:
    mean_states: float
    rate: float
    utilization: Optional[float] = None
    packet_len: Optional[float] = None
    kappa: float = DEFAULT_KAPPA
    timeout: float = math.inf

    def __post_init__(self):
        for field_name in ("mean_states", "rate", "kappa", "timeout"):
            if getattr(self, field_name) < 0:
                raise ValueError(f"{field_name} must be >= 0")


def state_from_rate(alpha: float, rtt: RttModel, kappa: float = DEFAULT_KAPPA,
                    timeout: float = math.inf) -> float:
    """Mean pending states: alpha * (E[min(RTT,T)] + kappa * std(min(RTT,T)))."""
    if alpha < 0 or kappa < 0:
        raise ValueError("alpha and kappa must be >= 0")
    if not timeout > 0:
        raise ValueError("timeout must be positive")
    if alpha == 0:
        return 0.0
    m, s = rtt.clipped_moments(timeout)
    return alpha * (m + kappa * s)


def estimate(alpha: float, rtt: RttModel, kappa: float = DEFAULT_KAPPA,
             timeout: float = math.inf, packet_len: float = PACKET_BITS) -> StateEstimate:
    """:func:`state_from_rate` with its inputs, plus the carried load they imply."""
    states = state_from_rate(alpha, rtt, kappa, timeout)
    return StateEstimate(states, alpha, alpha * packet_len, packet_len, kappa, timeout)


def state_from_utilization(utilization: float, packet_len: float, rtt: RttModel,
                           kappa: float = DEFAULT_KAPPA) -> float:
    """Mean states on a link carrying ``utilization`` bit/s: (U/l) * (E[RTT] + kappa*std)."""
    if utilization < 0 or kappa < 0:
        raise ValueError("utilization and kappa must be >= 0")
    if not packet_len > 0:
        raise ValueError("packet length must be positive")
    m, s = rtt.moments()
    return utilization / packet_len * (m + kappa * s)


def memory_requirement(capacity_bps: float) -> float:
    """PIT entries needed for a line rate: 1.25 s / 8,000 bit * C."""
    if capacity_bps < 0:
        raise ValueError("capacity must be >= 0")
    return STATE_SECONDS / PACKET_BITS * capacity_bps


def optimal_rate_limit(capacity_bps: float, rtt: RttModel, packet_len: float = PACKET_BITS) -> float:
    """The limit that is right on average: C * <RTT> / <l>."""
    return capacity_bps * rtt.moments()[0] / packet_len


def rate_limit_utilization_gap(limit: float, rtt: RttModel, capacity_bps: float,
                               packet_len: float = PACKET_BITS, trials: int = 10_000,
                               seed: int = 0) -> dict:
    """Utilization reached when ``limit`` outstanding requests circulate through
    epochs of random RTT.

    In an epoch with round trip ``r`` the limit returns ``limit * l / r`` bit/s,
    i.e. a demand of ``limit * l / (r * C)`` relative to capacity.  ``mean_util``
    is the carried utilization (demand capped at 1); ``p5``/``p95`` are
    percentiles of the demand itself, so values above 1 are overload epochs.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if limit < 0 or not capacity_bps > 0 or not packet_len > 0:
        raise ValueError("limit >= 0, capacity > 0 and packet_len > 0 required")
    rng = np.random.default_rng(seed)
    r = np.asarray(rtt.sample(rng, trials), dtype=float)
    demand = limit * packet_len / (r * capacity_bps)
    carried = np.minimum(demand, 1.0)
    return {
        "mean_util": float(carried.mean()),
        "mean_demand": float(demand.mean()),
        "p5": float(np.percentile(demand, 5)),
        "p95": float(np.percentile(demand, 95)),
        "overload_fraction": float((demand > 1.0).mean()),
    }


def predict_vs_simulate(series, node: str, alpha: float, rtt: RttModel, window: tuple[float, float],
                        kappa: float = 0.0, timeout: float = math.inf) -> dict:
    """Compare :func:`state_from_rate` with the time-averaged PIT of ``node``."""
    t0, t1 = window
    horizon = series.duration_s
    if t0 < 0 or t1 <= t0 or (horizon is not None and t1 > horizon + 1e-9):
        raise ValueError(f"window {window} outside the run")
    predicted = state_from_rate(alpha, rtt, kappa, timeout)
    simulated = series.pit_time_average(node, t0, t1)
    if predicted == 0:
        err = 0.0 if simulated == 0 else math.inf
    else:
        err = abs(simulated - predicted) / predicted
    return {"predicted": predicted, "simulated": simulated, "relative_error": err}


def sizing_table(capacities=(1e8, 1e9, 1e10, 1e11)) -> list[tuple[float, float]]:
    return [(c, memory_requirement(c)) for c in capacities]


def states_table(alphas=(100, 1000, 10_000, 100_000), rtt: Optional[RttModel] = None,
                 kappa: float = DEFAULT_KAPPA, timeout: float = math.inf) -> list[tuple[float, float]]:
    rtt = rtt or RttModel.gamma(0.25, 0.25)
    return [(a, state_from_rate(a, rtt, kappa, timeout)) for a in alphas]
