"""Instantiate a scenario as live nodes, run it and collect the metrics."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .apps import Client, Producer
from .engine import Node, Simulator, connect, seconds
from .fitt import FittParams, FittStrategy
from .forwarder import Router
from .metrics import Recorder
from .scenario import ScenarioConfig, build_topology
from .topology import Topology, routes_toward

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    config: ScenarioConfig
    topology: Topology
    recorder: Recorder
    nodes: Dict[str, Node]
    wall_seconds: float = 0.0
    events_run: int = 0

    def csv(self) -> str:
        return self.recorder.to_csv()

    @property
    def routers(self) -> Dict[str, Router]:
        return {n: v for n, v in self.nodes.items() if isinstance(v, Router)}

    @property
    def producers(self) -> Dict[str, Producer]:
        return {n: v for n, v in self.nodes.items() if isinstance(v, Producer)}

    @property
    def clients(self) -> Dict[str, Client]:
        return {n: v for n, v in self.nodes.items() if isinstance(v, Client)}


class Network:
    """Live simulation assembled from a scenario; exposed for step-wise tests."""

    def __init__(self, cfg: ScenarioConfig) -> None:
        cfg.validate()
        self.cfg = cfg
        self.topology = build_topology(cfg)
        self.sim = Simulator()
        self.recorder = Recorder(cfg.duration, cfg.metric_bin)
        self.nodes: Dict[str, Node] = {}
        self._build()

    def _fitt_params(self, node: str) -> FittParams:
        t = self.cfg.timers
        over = self.cfg.node_timers.get(node, {})
        return FittParams(
            revert_timer=seconds(over.get("revert_timer", t.revert_timer)),
            rate_limit_timer=seconds(over.get("rate_limit_timer", t.rate_limit_timer)),
            tolerance=t.tolerance,
            keep_blacklist_on_revert=t.keep_blacklist_on_revert,
        )

    def _build(self) -> None:
        cfg, topo, sim, rec = self.cfg, self.topology, self.sim, self.recorder
        producers = {p.node: p for p in cfg.producers}
        clients = {c.name: c for c in cfg.clients}
        for name, spec in topo.nodes.items():
            if spec.role == "router":
                node = Router(name, sim, rec, pit_lifetime=seconds(cfg.timers.pit_lifetime),
                              cs_capacity=cfg.cs_capacity, is_edge=spec.is_edge,
                              fitt_enabled=spec.fitt_enabled and cfg.fitt)
            elif spec.role == "producer":
                if name not in producers:
                    continue
                node = Producer(name, sim, rec, producers[name].config)
            else:
                if name not in clients:
                    continue
                node = Client(name, sim, rec, clients[name].flows, seed=cfg.seed,
                              ramp_window=cfg.timers.rate_limit_timer, jitter=cfg.jitter)
            self.nodes[name] = node
        for link in topo.links:
            a, b = self.nodes.get(link.a), self.nodes.get(link.b)
            if a is None or b is None:
                continue
            connect(a, b, int(round(link.delay_ms * 1000)), link.capacity)

        for pname, setup in producers.items():
            for rname, nh in routes_toward(topo, pname).items():
                router = self.nodes[rname]
                router.fib.add(setup.config.prefix, router.face_to(nh))

        for node in self.nodes.values():
            if not isinstance(node, Router):
                continue
            for fid, face in node.faces.items():
                if isinstance(face.peer, Router) and not face.peer.fitt_enabled:
                    node.opaque_faces.add(fid)
            if node.fitt_enabled:
                node.attach_strategy(FittStrategy(node, self._fitt_params(node.name)))

    def start(self) -> None:
        for name in sorted(self.nodes):
            self.nodes[name].start()
        bin_us = self.recorder.bin_us
        for b in range(self.recorder.n_bins):
            self.sim.schedule((b + 1) * bin_us - 1, self._sample_limits)

    def _sample_limits(self) -> None:
        now = self.sim.now
        for name in sorted(self.nodes):
            node = self.nodes[name]
            if isinstance(node, Router) and node.strategy is not None:
                node.strategy.sample_limits(now)

    def run(self, until: Optional[float] = None) -> None:
        end = seconds(self.cfg.duration if until is None else until)
        self.sim.run_until(end)
        for name in sorted(self.nodes):
            node = self.nodes[name]
            if isinstance(node, Router):
                node.on_pit_expiry(end)


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    t0 = time.perf_counter()
    net = Network(cfg)
    net.start()
    net.run()
    wall = time.perf_counter() - t0
    log.info("scenario %s: %d events in %.2fs", cfg.name, net.sim.events_run, wall)
    return RunResult(cfg, net.topology, net.recorder, net.nodes, wall, net.sim.events_run)
