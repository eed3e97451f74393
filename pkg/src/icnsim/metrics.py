"""Metric series, CSV export/import and run summaries.

Every metric is a row ``(time_s, node, metric, value)`` filed under a metric
family; each family exports to its own ``<family>.csv``.  Cumulative counters
are exported as running totals so per-window rates can be recomputed from the
CSV alone.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .names import US_PER_S

FAMILIES = ("pit", "retransmits", "cpu", "memory", "link", "goodput", "drops", "expiries", "traffic", "files", "agents")
HEADER = ("time_s", "node", "metric", "value")

# family of each metric name; anything else lands in "agents"
METRIC_FAMILY = {
    "pit_size": "pit", "backlog": "pit", "pit_integral": "pit",
    "interest_retransmits": "retransmits",
    "cpu_utilization": "cpu", "cpu_fraction": "cpu",
    "memory_bytes": "memory",
    "link_bits": "link",
    "goodput_bits": "goodput", "data_received": "goodput",
    "pit_expiries": "expiries",
    "interests_in": "traffic", "data_in": "traffic", "interests_sent": "traffic",
    "file_start": "files", "file_stop": "files",
}


def family_of(metric: str) -> str:
    if metric.startswith("drops_"):
        return "drops"
    return METRIC_FAMILY.get(metric, "agents")


class MetricsSeries:
    """Append-only store of samples, grouped by family."""

    def __init__(self, interval_s: float = 0.1, duration_s: Optional[float] = None):
        self.interval_s = interval_s
        self.duration_s = duration_s
        self._rows: dict[str, list[tuple[int, str, str, Union[int, float]]]] = {f: [] for f in FAMILIES}
        self._last: dict[str, int] = defaultdict(int)
        self.meta: dict[str, object] = {}

    def record(self, time_us: int, node: str, metric: str, value: Union[int, float]) -> None:
        fam = family_of(metric)
        if time_us < self._last[fam]:
            raise ValueError(f"out-of-order sample for {fam}: {time_us} < {self._last[fam]}")
        self._last[fam] = time_us
        self._rows[fam].append((time_us, node, metric, value))

    def rows(self, family: str) -> list[tuple[int, str, str, Union[int, float]]]:
        return self._rows[family]

    def __len__(self):
        return sum(len(r) for r in self._rows.values())

    # ---------------------------------------------------------- queries
    def series(self, node: str, metric: str) -> tuple[np.ndarray, np.ndarray]:
        """(times in seconds, values) for one node and metric."""
        rows = [r for r in self._rows[family_of(metric)] if r[1] == node and r[2] == metric]
        t = np.array([r[0] for r in rows], dtype=float) / US_PER_S
        v = np.array([r[3] for r in rows], dtype=float)
        return t, v

    def nodes(self, metric: str) -> list[str]:
        seen: dict[str, None] = {}
        for r in self._rows[family_of(metric)]:
            if r[2] == metric:
                seen.setdefault(r[1], None)
        return list(seen)

    def nodes_metrics(self, node: str, prefix: str = "") -> list[str]:
        """Metric names recorded for ``node`` that start with ``prefix``."""
        fams = ("drops",) if prefix.startswith("drops_") else FAMILIES
        seen: dict[str, None] = {}
        for fam in fams:
            for r in self._rows[fam]:
                if r[1] == node and r[2].startswith(prefix):
                    seen.setdefault(r[2], None)
        return list(seen)

    def last(self, node: str, metric: str, default: float = 0.0) -> float:
        _, v = self.series(node, metric)
        return float(v[-1]) if v.size else default

    def window_values(self, node: str, metric: str, t0: float, t1: float) -> np.ndarray:
        t, v = self.series(node, metric)
        return v[(t > t0 + 1e-9) & (t <= t1 + 1e-9)]

    def cumulative_at(self, node: str, metric: str, t_s: float) -> float:
        """Value of a cumulative counter at the last sample no later than ``t_s``."""
        t, v = self.series(node, metric)
        idx = np.searchsorted(t, t_s + 1e-9, side="right") - 1
        return float(v[idx]) if idx >= 0 else 0.0

    def pit_time_average(self, node: str, t0: float, t1: float) -> float:
        """Time-averaged PIT size of ``node`` over [t0, t1] (sample-aligned)."""
        if t1 <= t0:
            raise ValueError("empty window")
        t, _ = self.series(node, "pit_integral")
        if t.size:
            a0 = self.cumulative_at(node, "pit_integral", t0)
            a1 = self.cumulative_at(node, "pit_integral", t1)
            return (a1 - a0) / (t1 - t0)
        vals = self.window_values(node, "pit_size", t0, t1)
        return float(vals.mean()) if vals.size else 0.0

    def files(self, node: Optional[str] = None) -> dict[tuple[str, int], list[float]]:
        """Per-file ``[start_s, stop_s]`` (stop is NaN while unfinished)."""
        out: dict[tuple[str, int], list[float]] = {}
        for t, nd, metric, value in self._rows["files"]:
            if node is not None and nd != node:
                continue
            key = (nd, int(value))
            if metric == "file_start":
                out[key] = [t / US_PER_S, math.nan]
            elif key in out:
                out[key][1] = t / US_PER_S
        return out


def _fmt(v: Union[int, float]) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def export_csv(series: MetricsSeries, out_dir: Union[str, Path]) -> list[Path]:
    """Write one ``<family>.csv`` per metric family; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for fam in FAMILIES:
        path = out / f"{fam}.csv"
        with path.open("w", newline="") as fh:
            fh.write(csv_text(series, fam))
        paths.append(path)
    return paths


def csv_text(series: MetricsSeries, family: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for t, node, metric, value in series.rows(family):
        w.writerow((f"{t / US_PER_S:.6f}", node, metric, _fmt(value)))
    return buf.getvalue()


def _parse_value(text: str) -> Union[int, float]:
    try:
        return int(text)
    except ValueError:
        return float(text)


def load_csv(in_dir: Union[str, Path], interval_s: float = 0.1) -> MetricsSeries:
    """Rebuild a series from the files written by :func:`export_csv`."""
    series = MetricsSeries(interval_s)
    src = Path(in_dir)
    for fam in FAMILIES:
        path = src / f"{fam}.csv"
        if not path.exists():
            continue
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if tuple(header or ()) != HEADER:
                raise ValueError(f"{path}: unexpected header {header}")
            for t, node, metric, value in reader:
                series.record(int(round(float(t) * US_PER_S)), node, metric, _parse_value(value))
    return series


# ------------------------------------------------------------------ summary

@dataclass
class NodeStats:
    #: PIT mean and std cover the receiver's download activity window when
    #: there is one, the whole run otherwise
    pit_mean: float = 0.0
    pit_std: float = 0.0
    pit_peak: float = 0.0
    retransmits: float = 0.0
    memory_peak: float = 0.0
    cpu_mean: float = 0.0
    expiries: float = 0.0


@dataclass
class RunSummary:
    hops: dict[str, NodeStats] = field(default_factory=dict)
    receiver_goodput_bps: float = 0.0
    files_completed: int = 0
    files_total: int = 0
    completion_mean_s: float = 0.0
    completion_std_s: float = 0.0
    completion_max_s: float = 0.0
    max_hop: Optional[str] = None
    max_hop_pit_mean: float = 0.0
    max_hop_pit_std: float = 0.0
    argmax_memory_hop: Optional[str] = None
    retransmits_non_increasing: bool = True
    assertions: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = []
        for hop, st in self.hops.items():
            out.append(f"{hop}: pit mean={st.pit_mean:.1f} std={st.pit_std:.1f} peak={st.pit_peak:.0f} "
                       f"retransmits={st.retransmits:.0f} expiries={st.expiries:.0f} "
                       f"mem_peak={st.memory_peak:.0f}B cpu={st.cpu_mean:.3f}")
        out.append(f"receiver goodput: {self.receiver_goodput_bps / 1e6:.3f} Mbit/s")
        out.append(f"files: {self.files_completed}/{self.files_total} complete, "
                   f"duration mean={self.completion_mean_s:.2f}s std={self.completion_std_s:.2f}s "
                   f"max={self.completion_max_s:.2f}s")
        if self.max_hop:
            out.append(f"max-load hop: {self.max_hop} mean PIT {self.max_hop_pit_mean:.1f} "
                       f"+/- {self.max_hop_pit_std:.1f}")
        out.append(f"argmax peak memory: {self.argmax_memory_hop}")
        out.append(f"retransmits non-increasing toward source: {self.retransmits_non_increasing}")
        for key, ok in self.assertions.items():
            out.append(f"[{'PASS' if ok else 'FAIL'}] {key} {self.details.get(key, '')}".rstrip())
        return out


def hop_order(nodes: Iterable[str]) -> list[str]:
    """Router ids ``R1..Rn`` in hop order."""
    routers = [n for n in nodes if n.startswith("R") and n[1:].isdigit()]
    return sorted(routers, key=lambda n: int(n[1:]))


def retransmit_ordering(counts: list[float], noise: float = 0.05) -> bool:
    """Counts never rise toward the source by more than ``noise`` (relative)."""
    for a, b in zip(counts, counts[1:]):
        if b > a * (1 + noise) + 1e-9:
            return False
    return True


def completion_times(series: MetricsSeries, node: Optional[str] = None) -> np.ndarray:
    spans = series.files(node)
    return np.array([stop - start for start, stop in spans.values() if not math.isnan(stop)])


def receiver_goodput(series: MetricsSeries, node: str = "consumer",
                     t0: Optional[float] = None, t1: Optional[float] = None) -> float:
    """Mean goodput (bit/s) at ``node`` over [t0, t1] (default: activity span)."""
    t, v = series.series(node, "goodput_bits")
    if not t.size:
        return 0.0
    if t0 is None or t1 is None:
        spans = series.files(node)
        if spans:
            starts = [s for s, _ in spans.values()]
            stops = [e for _, e in spans.values()]
            t0 = min(starts) if t0 is None else t0
            t1 = (max(stops) if not any(math.isnan(e) for e in stops) else float(t[-1])) if t1 is None else t1
        else:
            t0 = 0.0 if t0 is None else t0
            t1 = float(t[-1]) if t1 is None else t1
    mask = (t > t0 + 1e-9) & (t <= t1 + series.interval_s - 1e-9)
    span = max(t1 - t0, series.interval_s)
    return float(v[mask].sum()) / span


def activity_window(series: MetricsSeries, node: str = "consumer") -> tuple[Optional[float], Optional[float]]:
    """(first file start, last file stop) at ``node``; run end if a file is unfinished.

    ``(None, None)`` when the node downloaded no files.
    """
    spans = series.files(node)
    if not spans:
        return None, None
    t0 = min(s for s, _ in spans.values())
    stops = [e for _, e in spans.values()]
    if any(math.isnan(e) for e in stops):
        rows = series.rows("pit")
        end = rows[-1][0] / US_PER_S if rows else t0
        return t0, float(end)
    return t0, max(stops)


def summarize(series: MetricsSeries, properties: Optional[list[dict]] = None,
              receiver: str = "consumer") -> RunSummary:
    """Fold a run's series into per-hop statistics and evaluate properties."""
    from .scenarios.properties import evaluate

    summary = RunSummary()
    hops = hop_order(series.nodes("pit_size"))
    t0, t1 = activity_window(series, receiver)
    for hop in hops:
        tp, pit = series.series(hop, "pit_size")
        if t0 is not None:
            pit = pit[(tp >= t0 - 1e-9) & (tp <= t1 + 1e-9)]
        _, mem = series.series(hop, "memory_bytes")
        _, cpu = series.series(hop, "cpu_utilization")
        summary.hops[hop] = NodeStats(
            pit_mean=float(pit.mean()) if pit.size else 0.0,
            pit_std=float(pit.std()) if pit.size else 0.0,
            pit_peak=float(pit.max()) if pit.size else 0.0,
            retransmits=series.last(hop, "interest_retransmits"),
            memory_peak=float(mem.max()) if mem.size else 0.0,
            cpu_mean=float(cpu.mean()) if cpu.size else 0.0,
            expiries=series.last(hop, "pit_expiries"),
        )
    if hops:
        top = max(hops, key=lambda h: (summary.hops[h].pit_mean, -int(h[1:])))
        summary.max_hop = top
        summary.max_hop_pit_mean = summary.hops[top].pit_mean
        summary.max_hop_pit_std = summary.hops[top].pit_std
        memtop = max(hops, key=lambda h: (summary.hops[h].memory_peak, -int(h[1:])))
        summary.argmax_memory_hop = memtop if summary.hops[memtop].memory_peak > 0 else None
        summary.retransmits_non_increasing = retransmit_ordering([summary.hops[h].retransmits for h in hops])
    summary.receiver_goodput_bps = receiver_goodput(series, receiver)
    spans = series.files(receiver)
    durations = completion_times(series, receiver)
    summary.files_total = len(spans)
    summary.files_completed = int(durations.size)
    if durations.size:
        summary.completion_mean_s = float(durations.mean())
        summary.completion_std_s = float(durations.std())
        summary.completion_max_s = float(durations.max())
    for prop in properties or []:
        ok, detail = evaluate(series, prop)
        key = prop.get("label") or prop["check"]
        summary.assertions[key] = ok
        summary.details[key] = detail
    return summary


def verdict_text(summary: RunSummary) -> str:
    """Flat ``key: PASS|FAIL`` lines, one per assertion."""
    return "".join(f"{k}: {'PASS' if ok else 'FAIL'}\n" for k, ok in summary.assertions.items())
