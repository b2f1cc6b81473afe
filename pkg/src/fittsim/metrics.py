"""Time-binned metric collection and CSV export."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from .engine import US_PER_S

CSV_HEADER = ("time_bin", "node", "prefix", "metric", "value")

# value written for a 'limit' sample when no throttle is installed
UNLIMITED_SENTINEL = -1.0


class MetricSample(NamedTuple):
    time_bin: float
    node: str
    prefix: str
    metric: str
    value: float


class Origin(NamedTuple):
    node: str
    legit: bool


@dataclass
class LogEvent:
    time: int
    node: str
    kind: str
    prefix: str = "-"
    face: int = 0
    value: float = 0.0


class Recorder:
    """Counters keyed by (bin, node, prefix, metric) plus a protocol event log.

    Origin tags (which client emitted a nonce, and whether it is legitimate)
    are simulator ground truth; only metrics code reads them.
    """

    def __init__(self, duration: float, bin_width: float = 1.0) -> None:
        self.bin_us = int(round(bin_width * US_PER_S))
        self.bin_width = bin_width
        self.n_bins = max(1, int(math.ceil(duration / bin_width - 1e-9)))
        self.counts: Dict[Tuple[int, str, str, str], float] = defaultdict(float)
        self.gauges: Dict[Tuple[str, str, str], Dict[int, float]] = {}
        self.series: Dict[Tuple[str, str, str], None] = {}
        self.origins: Dict[int, Origin] = {}
        self.log: List[LogEvent] = []
        self.legit_nodes: Dict[str, None] = {}
        self.attack_nodes: Dict[str, None] = {}
        self.producer_prefixes: Dict[Tuple[str, str], None] = {}

    def bin_of(self, t: int) -> int:
        return t // self.bin_us

    def declare(self, node: str, prefix: str, metric: str) -> None:
        self.series.setdefault((node, prefix, metric), None)

    def add(self, t: int, node: str, prefix: str, metric: str, value: float = 1.0) -> None:
        b = t // self.bin_us
        if b < self.n_bins:
            self.counts[(b, node, prefix, metric)] += value
            self.series.setdefault((node, prefix, metric), None)

    def gauge(self, t: int, node: str, prefix: str, metric: str, value: float) -> None:
        b = t // self.bin_us
        if b < self.n_bins:
            self.gauges.setdefault((node, prefix, metric), {})[b] = value

    def event(self, t: int, node: str, kind: str, prefix: str = "-", face: int = 0,
              value: float = 0.0) -> None:
        self.log.append(LogEvent(t, node, kind, prefix, face, value))

    def tag(self, nonce: int, node: str, legit: bool) -> None:
        self.origins[nonce] = Origin(node, legit)

    def origin_of(self, nonce: int) -> Optional[Origin]:
        return self.origins.get(nonce)

    # ------------------------------------------------------------------ queries

    def series_values(self, node: str, prefix: str, metric: str) -> List[float]:
        if metric == "legit_share":
            rec = self.series_values(node, prefix, "received")
            leg = self.series_values(node, prefix, "received_legit")
            return [l / r if r > 0 else 1.0 for l, r in zip(leg, rec)]
        key = (node, prefix, metric)
        if key in self.gauges:
            g = self.gauges[key]
            return [g.get(b, UNLIMITED_SENTINEL) for b in range(self.n_bins)]
        return [self.counts.get((b, node, prefix, metric), 0.0) for b in range(self.n_bins)]

    def rate(self, node: str, prefix: str, metric: str) -> List[float]:
        """Per-second rate of a counter series."""
        return [v / self.bin_width for v in self.series_values(node, prefix, metric)]

    def group_rate(self, nodes: Iterable[str], prefix: str, metric: str) -> List[float]:
        total = [0.0] * self.n_bins
        for n in nodes:
            for i, v in enumerate(self.series_values(n, prefix, metric)):
                total[i] += v
        return [v / self.bin_width for v in total]

    def events(self, kind: str, node: Optional[str] = None,
               prefix: Optional[str] = None) -> List[LogEvent]:
        return [e for e in self.log
                if e.kind == kind and (node is None or e.node == node)
                and (prefix is None or e.prefix == prefix)]

    # ------------------------------------------------------------------ export

    def samples(self) -> List[MetricSample]:
        keys = set(self.series) | set(self.gauges)
        for node, prefix in self.producer_prefixes:
            keys.add((node, prefix, "legit_share"))
        # group totals for plotting attacker vs legitimate send rates
        group_keys = set()
        for node, prefix, metric in list(keys):
            if metric == "sent":
                if node in self.attack_nodes:
                    group_keys.add(("attackers", prefix))
                elif node in self.legit_nodes:
                    group_keys.add(("legit", prefix))
        out: List[MetricSample] = []
        for node, prefix, metric in keys:
            for b, v in enumerate(self.series_values(node, prefix, metric)):
                out.append(MetricSample(b * self.bin_width, node, prefix, metric, v))
        for group, prefix in group_keys:
            members = self.attack_nodes if group == "attackers" else self.legit_nodes
            for b, v in enumerate(self.group_rate(members, prefix, "sent")):
                out.append(MetricSample(b * self.bin_width, group, prefix, "sent",
                                        v * self.bin_width))
        out.sort(key=lambda s: (s.time_bin, s.node, s.prefix, s.metric))
        return out

    def to_csv(self, stream: Optional[io.TextIOBase] = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in self.samples():
            w.writerow((f"{s.time_bin:.6f}", s.node, s.prefix, s.metric, f"{s.value:.6f}"))
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text
