"""Machine-checkable scenario assertions evaluated on a metric series.

A property is a plain dict ``{"check": name, "label": ..., **params}``.  Each
check reads only the :class:`~icnsim.metrics.MetricsSeries`, so verdicts can
be recomputed from exported CSV files.  Checks return ``(ok, detail)``.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from ..metrics import MetricsSeries, activity_window, completion_times, hop_order, retransmit_ordering

CHECKS: dict[str, Callable[..., tuple[bool, str]]] = {}


def check(fn):
    CHECKS[fn.__name__] = fn
    return fn


def evaluate(series: MetricsSeries, prop: dict) -> tuple[bool, str]:
    fn = CHECKS.get(prop["check"])
    if fn is None:
        raise KeyError(f"unknown property check {prop['check']!r}")
    return fn(series, **{k: v for k, v in prop.items() if k not in ("check", "label")})


def prop(check_name: str, label: Optional[str] = None, **params) -> dict:
    """Build a property dict, validating the check name early."""
    if check_name not in CHECKS:
        raise KeyError(f"unknown property check {check_name!r}")
    return {"check": check_name, "label": label or check_name, **params}


# ------------------------------------------------------------------ helpers

def _routers(series: MetricsSeries, hops: Optional[Sequence[str]] = None) -> list[str]:
    return list(hops) if hops else hop_order(series.nodes("pit_size"))


def _end(series: MetricsSeries) -> float:
    rows = series.rows("pit") or series.rows("agents")
    return rows[-1][0] / 1e6 if rows else 0.0


def _win(series: MetricsSeries, window) -> tuple[float, float]:
    t0, t1 = window
    return float(t0), float(_end(series) if t1 is None else t1)


def delta(series: MetricsSeries, node: str, metric: str, window) -> float:
    """Increase of a cumulative counter over ``window``."""
    t0, t1 = _win(series, window)
    return series.cumulative_at(node, metric, t1) - series.cumulative_at(node, metric, t0)


def window_stat(series: MetricsSeries, node: str, metric: str, window, stat: str = "mean") -> float:
    t0, t1 = _win(series, window)
    if stat == "delta":
        return delta(series, node, metric, (t0, t1))
    if stat == "rate":
        return delta(series, node, metric, (t0, t1)) / max(t1 - t0, 1e-9)
    vals = series.window_values(node, metric, t0, t1)
    if stat == "sum":
        return float(vals.sum())
    if not vals.size:
        return 0.0
    if stat == "mean":
        return float(vals.mean())
    if stat == "max":
        return float(vals.max())
    if stat == "last":
        return float(vals[-1])
    raise ValueError(f"unknown statistic {stat!r}")


# ------------------------------------------------------------------- checks

@check
def pit_peak_between(series, node: str, lo: float, hi: float):
    _, v = series.series(node, "pit_size")
    peak = float(v.max()) if v.size else 0.0
    return lo <= peak <= hi, f"{node} peak PIT {peak:.0f} in [{lo:.0f}, {hi:.0f}]"


@check
def pit_plateau(series, node: str, value: float, window):
    vals = series.window_values(node, "pit_size", *_win(series, window))
    ok = vals.size > 0 and bool(np.all(vals == value))
    seen = sorted(set(vals.tolist()))[:3]
    return ok, f"{node} PIT over window = {value} (saw {seen})"


@check
def counter_keeps_rising(series, node: str, metric: str, t0: float, seconds: int, min_per_s: float = 1.0):
    """Counter grows by at least ``min_per_s`` in every 1 s step after ``t0``."""
    worst = math.inf
    for k in range(int(seconds)):
        worst = min(worst, delta(series, node, metric, (t0 + k, t0 + k + 1)))
    return worst >= min_per_s, f"{node} {metric} min increase per s after {t0:.0f}s: {worst:.0f}"


@check
def no_drops(series, nodes: Optional[list] = None):
    total = 0.0
    for node in _routers(series, nodes):
        for metric in series.nodes_metrics(node, prefix="drops_"):
            total += series.last(node, metric)
    return total == 0, f"drops: {total:.0f}"


@check
def all_files_complete(series, node: str = "consumer"):
    spans = series.files(node)
    done = sum(1 for _, e in spans.values() if not math.isnan(e))
    return len(spans) > 0 and done == len(spans), f"{done}/{len(spans)} files complete"


@check
def completion_cv_below(series, node: str = "consumer", max_cv: float = 0.25):
    d = completion_times(series, node)
    cv = float(d.std() / d.mean()) if d.size and d.mean() > 0 else math.inf
    return cv < max_cv, f"completion spread/mean {cv:.3f} < {max_cv}"


@check
def completion_mean_at_least(series, node: str = "consumer", min_s: float = 0.0):
    """Mean completion time, counting unfinished files as lasting until run end."""
    spans = series.files(node)
    end = _end(series)
    d = [(e if not math.isnan(e) else end) - s for s, e in spans.values()]
    mean = float(np.mean(d)) if d else 0.0
    return mean >= min_s, f"censored mean completion {mean:.1f}s >= {min_s:.1f}s"


@check
def link_utilization_below(series, link: str, capacity_bps: float, max_fraction: float,
                           node: str = "consumer"):
    t0, t1 = activity_window(series, node)
    if t0 is None:
        t0, t1 = 0.0, _end(series)
    bits = window_stat(series, link, "link_bits", (t0, t1), "sum")
    util = bits / max(t1 - t0, 1e-9) / capacity_bps
    return util < max_fraction, f"{link} mean utilization {util:.3f} < {max_fraction}"


@check
def retransmits_non_increasing(series, noise: float = 0.05):
    hops = _routers(series)
    counts = [series.last(h, "interest_retransmits") for h in hops]
    ok = retransmit_ordering(counts, noise)
    return ok, "retransmits by hop " + ", ".join(f"{c:.0f}" for c in counts)


@check
def zero_retransmits(series):
    total = sum(series.last(h, "interest_retransmits") for h in _routers(series))
    return total == 0, f"retransmits: {total:.0f}"


def _peaks(series, hops):
    return {h: float(series.series(h, "memory_bytes")[1].max(initial=0.0)) for h in hops}


@check
def memory_argmax(series, hop: str, min_ratio: float = 1.0):
    """``hop`` has the largest peak memory and beats the others' median by ``min_ratio``."""
    peaks = _peaks(series, _routers(series))
    top = max(peaks, key=lambda h: (peaks[h], -int(h[1:])))
    others = [v for h, v in peaks.items() if h != hop]
    med = float(np.median(others)) if others else 0.0
    ratio = peaks[hop] / med if med > 0 else math.inf
    return top == hop and ratio >= min_ratio, f"argmax {top}, {hop}/median(others) = {ratio:.2f}"


@check
def memory_balanced(series, max_excess: float = 0.5):
    peaks = _peaks(series, _routers(series))
    worst = 0.0
    for h, v in peaks.items():
        others = [x for k, x in peaks.items() if k != h]
        med = float(np.median(others)) if others else v
        if med > 0:
            worst = max(worst, v / med - 1.0)
    return worst <= max_excess, f"largest excess over median of others {worst:.2f} <= {max_excess}"


@check
def retransmits_at_least(series, hops: list, min_count: float):
    low = min(series.last(h, "interest_retransmits") for h in hops)
    return low >= min_count, f"min retransmits over {hops}: {low:.0f} >= {min_count:.0f}"


@check
def goodput_below(series, node: str = "consumer", max_bps: float = math.inf):
    from ..metrics import receiver_goodput
    g = receiver_goodput(series, node)
    return g < max_bps, f"{node} goodput {g / 1e6:.3f} Mbit/s < {max_bps / 1e6:.3f}"


@check
def ratio_between(series, num: dict, den: dict, lo: float = -math.inf, hi: float = math.inf,
                  floor: float = 0.0):
    """``stat(num) / max(stat(den), floor)`` within [lo, hi].

    ``num``/``den`` are ``{"node", "metric", "window", "stat"}`` (``node`` may
    be a list, values are summed).
    """
    a = _stat_spec(series, num)
    b = _stat_spec(series, den)
    r = a / max(b, floor) if max(b, floor) > 0 else (math.inf if a > 0 else 1.0)
    return lo <= r <= hi, f"{_name(num)} / {_name(den)} = {a:.4g}/{b:.4g} = {r:.3f} in [{lo}, {hi}]"


@check
def value_between(series, spec: dict, lo: float = -math.inf, hi: float = math.inf):
    v = _stat_spec(series, spec)
    return lo <= v <= hi, f"{_name(spec)} = {v:.4g} in [{lo}, {hi}]"


@check
def every_node_ratio_at_least(series, nodes: list, metric: str, during, before, min_ratio: float,
                              floor: float = 1.0, stat: str = "mean"):
    """For every node, stat(metric, during) >= min_ratio * max(stat(before), floor)."""
    parts, ok = [], True
    for node in nodes:
        a = window_stat(series, node, metric, during, stat)
        b = window_stat(series, node, metric, before, stat)
        r = a / max(b, floor)
        ok &= r >= min_ratio
        parts.append(f"{node} {a:.3g}/{max(b, floor):.3g}={r:.1f}")
    return ok, f"{metric} during/before >= {min_ratio}: " + ", ".join(parts)


@check
def equal_values(series, a: dict, b: dict):
    va, vb = _stat_spec(series, a), _stat_spec(series, b)
    return va == vb, f"{_name(a)} = {va:.0f}, {_name(b)} = {vb:.0f}"


@check
def goodput_drop_matches_share(series, node: str, jammer: str, link: str, before, during,
                               tolerance: float = 0.1):
    """Relative goodput loss at ``node`` equals the jammer's share of link bits."""
    g0 = window_stat(series, node, "goodput_bits", before, "sum") / (before[1] - before[0])
    g1 = window_stat(series, node, "goodput_bits", during, "sum") / (during[1] - during[0])
    jam = window_stat(series, jammer, "ignored_bits", during, "delta")
    total = window_stat(series, link, "link_bits", during, "sum")
    share = jam / total if total > 0 else 0.0
    loss = 1.0 - g1 / g0 if g0 > 0 else 0.0
    return abs(loss - share) <= tolerance and share > 0.1, \
        f"goodput loss {loss:.3f} vs jam share {share:.3f} (tol {tolerance})"


def _stat_spec(series, spec: dict) -> float:
    nodes = spec["node"] if isinstance(spec["node"], list) else [spec["node"]]
    window = spec.get("window", (0.0, None))
    return sum(window_stat(series, n, spec["metric"], window, spec.get("stat", "mean")) for n in nodes)


def _name(spec: dict) -> str:
    node = spec["node"] if not isinstance(spec["node"], list) else "+".join(spec["node"])
    return f"{spec.get('stat', 'mean')}({node}.{spec['metric']})"
