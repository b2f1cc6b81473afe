"""Scenario configuration: dataclasses, TOML ingestion and built-in scenarios."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .apps import ATTACK_KINDS, TRAFFIC_CLASSES, AttackSpec, ConsumerConfig, FlowConfig, ProducerConfig
from .names import MalformedName, Name, parse_name
from .topology import (NodeSpec, Topology, TopologyError, attach_clients, check_reachability,
                       four_as_mesh, toy_topology)

TARGET_P = "/univ1/cs/server/email"
TARGET_P2 = "/univ2/service/email"


class ScenarioError(ValueError):
    """Invalid scenario; the message starts with the offending field path."""


@dataclass
class Timers:
    pit_lifetime: float = 2.0
    revert_timer: float = 5.0
    rate_limit_timer: float = 3.0
    keep_blacklist_on_revert: bool = False
    tolerance: float = 0.05


@dataclass
class TopologyConfig:
    kind: str = "four_as_mesh"  # four_as_mesh | toy | custom
    n_as: int = 4
    edges_per_as: int = 3
    link_delay_ms: float = 10.0
    routers: List[NodeSpec] = field(default_factory=list)  # custom only
    links: List[tuple] = field(default_factory=list)  # custom only: (a, b[, delay_ms])
    # explicit edge set; None keeps the generator's choice
    edges: Optional[List[str]] = None
    # routers that forward but run no FITT (opaque to pushback)
    untrusted: List[str] = field(default_factory=list)


@dataclass
class ProducerSetup:
    node: str
    config: ProducerConfig
    attach: Optional[str] = None


@dataclass
class ClientSetup:
    name: str
    flows: List[FlowConfig]
    attach: Optional[str] = None

    @property
    def role(self) -> str:
        for f in self.flows:
            if isinstance(f, AttackSpec) or not f.compliant:
                return "attacker"
        return "consumer"


@dataclass
class ScenarioConfig:
    name: str
    duration: float
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    producers: List[ProducerSetup] = field(default_factory=list)
    clients: List[ClientSetup] = field(default_factory=list)
    timers: Timers = field(default_factory=Timers)
    node_timers: Dict[str, Dict[str, float]] = field(default_factory=dict)
    seed: int = 1
    metric_bin: float = 1.0
    cs_capacity: int = 200
    fitt: bool = True
    jitter: float = 0.10

    def validate(self) -> "ScenarioConfig":
        if not self.duration > 0:
            raise ScenarioError("scenario.duration: must be > 0")
        if not self.metric_bin > 0:
            raise ScenarioError("scenario.metric_bin: must be > 0")
        if not self.producers:
            raise ScenarioError("producers: at least one producer is required")
        latest = 0.0
        for i, c in enumerate(self.clients):
            if not c.flows:
                raise ScenarioError(f"clients[{i}].flows: client {c.name!r} has no flows")
            for j, f in enumerate(c.flows):
                if not f.rate > 0:
                    raise ScenarioError(f"clients[{i}].flows[{j}].rate: must be > 0")
                latest = max(latest, f.start)
        if self.clients and not self.duration > latest:
            raise ScenarioError("scenario.duration: must exceed the latest flow start time")
        for k in ("pit_lifetime", "revert_timer", "rate_limit_timer"):
            if not getattr(self.timers, k) > 0:
                raise ScenarioError(f"timers.{k}: must be > 0")
        names = [p.node for p in self.producers] + [c.name for c in self.clients]
        if len(set(names)) != len(names):
            raise ScenarioError("clients: node names must be unique")
        return self


# ---------------------------------------------------------------------- topology


def build_topology(cfg: ScenarioConfig) -> Topology:
    """Expand a scenario into concrete nodes and links and check routability."""
    tc = cfg.topology
    if tc.kind == "four_as_mesh":
        topo = four_as_mesh(tc.n_as, tc.edges_per_as, tc.link_delay_ms)
    elif tc.kind == "toy":
        topo = toy_topology(tc.link_delay_ms)
    elif tc.kind == "custom":
        topo = Topology()
        for spec in tc.routers:
            topo.add_node(NodeSpec(spec.name, "router", spec.is_edge, spec.fitt_enabled))
        for link in tc.links:
            a, b, *rest = link
            topo.add_link(a, b, rest[0] if rest else tc.link_delay_ms)
    else:
        raise ScenarioError(f"topology.kind: unknown topology kind {tc.kind!r}")

    if tc.edges is not None:
        for name in tc.edges:
            if name not in topo.nodes or topo.nodes[name].role != "router":
                raise ScenarioError(f"topology.edges: {name!r} is not a router")
        for r in topo.routers():
            topo.nodes[r].is_edge = r in tc.edges
    for name in tc.untrusted:
        if name not in topo.nodes or topo.nodes[name].role != "router":
            raise ScenarioError(f"topology.untrusted: {name!r} is not a router")
        topo.nodes[name].fitt_enabled = False
        topo.nodes[name].is_edge = False

    for i, p in enumerate(cfg.producers):
        if p.node in topo.nodes:
            if topo.nodes[p.node].role != "producer":
                raise ScenarioError(f"producers[{i}].node: {p.node!r} is already a router")
            continue
        if p.attach is None or p.attach not in topo.nodes:
            raise ScenarioError(f"producers[{i}].attach: unknown router {p.attach!r}")
        topo.add_node(NodeSpec(p.node, role="producer", fitt_enabled=False))
        topo.add_link(p.attach, p.node, tc.link_delay_ms)

    pending = []
    for c in cfg.clients:
        if c.name in topo.nodes:
            # pre-placed client of a fixed topology such as the toy one
            topo.nodes[c.name].role = c.role
            continue
        pending.append((c.name, c.role, c.attach))
    try:
        attach_clients(topo, pending, tc.link_delay_ms)
    except TopologyError as exc:
        raise ScenarioError(f"clients: {exc}") from None

    for p in cfg.producers:
        targets = [c.name for c in cfg.clients
                   if any(_flow_prefix(f) == p.config.prefix
                          or p.config.prefix.is_prefix_of(_flow_prefix(f)) for f in c.flows)]
        try:
            check_reachability(topo, p.node, targets)
        except TopologyError as exc:
            raise ScenarioError(f"producers[{p.node}]: {exc}") from None
    for i, c in enumerate(cfg.clients):
        for j, f in enumerate(c.flows):
            if not any(p.config.prefix.is_prefix_of(_flow_prefix(f)) for p in cfg.producers):
                raise ScenarioError(
                    f"clients[{i}].flows[{j}].prefix: no producer serves {_flow_prefix(f)}")
    return topo


def _flow_prefix(f: FlowConfig) -> Name:
    return f.target_prefix if isinstance(f, AttackSpec) else f.prefix


# ---------------------------------------------------------------------- TOML


def _req(table: Dict[str, Any], key: str, path: str):
    if key not in table:
        raise ScenarioError(f"{path}.{key}: missing required field")
    return table[key]


def _typed(value, kind, path: str):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is float and isinstance(value, float):
        return value
    if kind is not float and isinstance(value, kind) and not (kind is int and isinstance(value, bool)):
        return value
    raise ScenarioError(f"{path}: expected {kind.__name__}, got {type(value).__name__}")


def _name(value, path: str) -> Name:
    if not isinstance(value, str):
        raise ScenarioError(f"{path}: expected a name string")
    try:
        return parse_name(value)
    except MalformedName as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _opt(table, key, kind, path, default):
    if key not in table:
        return default
    return _typed(table[key], kind, f"{path}.{key}")


def _check_keys(table: Dict[str, Any], allowed, path: str) -> None:
    for k in table:
        if k not in allowed:
            raise ScenarioError(f"{path}.{k}: unknown field")


def _parse_flow(t: Dict[str, Any], path: str) -> FlowConfig:
    ftype = _req(t, "type", path)
    if ftype == "attack":
        _check_keys(t, {"type", "kind", "rate", "prefix", "start", "stop", "name_universe"}, path)
        kind = _req(t, "kind", path)
        if kind not in ATTACK_KINDS:
            raise ScenarioError(f"{path}.kind: must be one of {', '.join(ATTACK_KINDS)}")
        rate = _typed(_req(t, "rate", path), float, f"{path}.rate")
        if not rate > 0:
            raise ScenarioError(f"{path}.rate: must be > 0")
        return AttackSpec(kind, rate, _name(_req(t, "prefix", path), f"{path}.prefix"),
                          start=_opt(t, "start", float, path, 3.0),
                          name_universe=_opt(t, "name_universe", int, path, 500),
                          stop=_opt(t, "stop", float, path, None))
    if ftype == "consumer":
        _check_keys(t, {"type", "traffic_class", "rate", "prefix", "start", "stop", "compliant",
                        "name_universe"}, path)
        tclass = t.get("traffic_class", "I3")
        if tclass not in TRAFFIC_CLASSES:
            raise ScenarioError(f"{path}.traffic_class: must be one of {', '.join(TRAFFIC_CLASSES)}")
        rate = _typed(_req(t, "rate", path), float, f"{path}.rate")
        if not rate > 0:
            raise ScenarioError(f"{path}.rate: must be > 0")
        return ConsumerConfig(_name(_req(t, "prefix", path), f"{path}.prefix"), rate, tclass,
                              start=_opt(t, "start", float, path, 0.0),
                              stop=_opt(t, "stop", float, path, None),
                              compliant=_opt(t, "compliant", bool, path, True),
                              name_universe=_opt(t, "name_universe", int, path, 500))
    raise ScenarioError(f"{path}.type: must be 'attack' or 'consumer'")


def parse_scenario(doc: Dict[str, Any]) -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig` from a parsed TOML document."""
    _check_keys(doc, {"scenario", "timers", "topology", "producers", "clients"}, "<root>")
    sc = _req(doc, "scenario", "<root>")
    _check_keys(sc, {"name", "duration", "seed", "metric_bin", "cs_capacity", "fitt", "jitter"},
                "scenario")
    cfg = ScenarioConfig(
        name=_typed(_req(sc, "name", "scenario"), str, "scenario.name"),
        duration=_typed(_req(sc, "duration", "scenario"), float, "scenario.duration"),
        seed=_opt(sc, "seed", int, "scenario", 1),
        metric_bin=_opt(sc, "metric_bin", float, "scenario", 1.0),
        cs_capacity=_opt(sc, "cs_capacity", int, "scenario", 200),
        fitt=_opt(sc, "fitt", bool, "scenario", True),
        jitter=_opt(sc, "jitter", float, "scenario", 0.10),
    )

    tm = doc.get("timers", {})
    _check_keys(tm, {"pit_lifetime", "revert_timer", "rate_limit_timer",
                     "keep_blacklist_on_revert", "tolerance", "nodes"}, "timers")
    cfg.timers = Timers(
        pit_lifetime=_opt(tm, "pit_lifetime", float, "timers", 2.0),
        revert_timer=_opt(tm, "revert_timer", float, "timers", 5.0),
        rate_limit_timer=_opt(tm, "rate_limit_timer", float, "timers", 3.0),
        keep_blacklist_on_revert=_opt(tm, "keep_blacklist_on_revert", bool, "timers", False),
        tolerance=_opt(tm, "tolerance", float, "timers", 0.05),
    )
    for node, overrides in tm.get("nodes", {}).items():
        path = f"timers.nodes.{node}"
        _check_keys(overrides, {"revert_timer", "rate_limit_timer"}, path)
        cfg.node_timers[node] = {k: _typed(v, float, f"{path}.{k}") for k, v in overrides.items()}

    tp = doc.get("topology", {})
    _check_keys(tp, {"kind", "n_as", "edges_per_as", "link_delay_ms", "routers", "links",
                     "edges", "untrusted"}, "topology")
    tc = TopologyConfig(
        kind=_opt(tp, "kind", str, "topology", "four_as_mesh"),
        n_as=_opt(tp, "n_as", int, "topology", 4),
        edges_per_as=_opt(tp, "edges_per_as", int, "topology", 3),
        link_delay_ms=_opt(tp, "link_delay_ms", float, "topology", 10.0),
        edges=tp.get("edges"),
        untrusted=list(tp.get("untrusted", [])),
    )
    for i, r in enumerate(tp.get("routers", [])):
        path = f"topology.routers[{i}]"
        _check_keys(r, {"name", "edge", "fitt"}, path)
        tc.routers.append(NodeSpec(_typed(_req(r, "name", path), str, f"{path}.name"),
                                   is_edge=_opt(r, "edge", bool, path, False),
                                   fitt_enabled=_opt(r, "fitt", bool, path, True)))
    for i, link in enumerate(tp.get("links", [])):
        path = f"topology.links[{i}]"
        if not isinstance(link, list) or len(link) not in (2, 3):
            raise ScenarioError(f"{path}: expected [a, b] or [a, b, delay_ms]")
        tc.links.append(tuple(link))
    cfg.topology = tc

    for i, p in enumerate(doc.get("producers", [])):
        path = f"producers[{i}]"
        _check_keys(p, {"node", "attach", "prefix", "capacity", "static_name_count", "freshness",
                        "fake_report_interval", "nack_refresh_interval", "alarm_hold"}, path)
        capacity = _opt(p, "capacity", float, path, 1500.0)
        if not capacity > 0:
            raise ScenarioError(f"{path}.capacity: must be > 0")
        pc = ProducerConfig(
            _name(_req(p, "prefix", path), f"{path}.prefix"),
            capacity=capacity,
            static_name_count=_opt(p, "static_name_count", int, path, 500),
            freshness=_opt(p, "freshness", float, path, 4.0),
            fake_report_interval=_opt(p, "fake_report_interval", float, path, 1.0),
            nack_refresh_interval=_opt(p, "nack_refresh_interval", float, path, 1.0),
            alarm_hold=_opt(p, "alarm_hold", float, path, 30.0),
        )
        cfg.producers.append(ProducerSetup(_typed(_req(p, "node", path), str, f"{path}.node"),
                                           pc, p.get("attach")))

    for i, c in enumerate(doc.get("clients", [])):
        path = f"clients[{i}]"
        _check_keys(c, {"name", "count", "attach", "flows"}, path)
        base = _typed(_req(c, "name", path), str, f"{path}.name")
        flows_t = _req(c, "flows", path)
        if not isinstance(flows_t, list) or not flows_t:
            raise ScenarioError(f"{path}.flows: expected a non-empty list of flow tables")
        flows = [_parse_flow(f, f"{path}.flows[{j}]") for j, f in enumerate(flows_t)]
        count = _opt(c, "count", int, path, 1)
        attach = c.get("attach")
        if count == 1 and "count" not in c:
            cfg.clients.append(ClientSetup(base, flows, attach))
        else:
            for k in range(count):
                cfg.clients.append(ClientSetup(f"{base}{k}", list(flows), attach))
    try:
        return cfg.validate()
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def load_scenario(source: str, **overrides) -> ScenarioConfig:
    """Resolve a built-in scenario name or read a TOML scenario file."""
    if source in BUILTINS:
        cfg = BUILTINS[source](**overrides)
        return cfg.validate()
    if not os.path.exists(source):
        raise ScenarioError(f"unknown scenario {source!r}: not a built-in and no such file")
    with open(source, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError(f"<file>: {exc}") from None
    cfg = parse_scenario(doc)
    for k, v in overrides.items():
        setattr(cfg, k, v)
    return cfg.validate()


# ---------------------------------------------------------------------- built-ins

N_ATTACKERS = 60
N_LEGIT = 12
ATTACK_RATE = 100.0
LEGIT_RATE = 40.0


def _server(prefix: str = TARGET_P, node: str = "server", attach: str = "core0",
            **kw) -> ProducerSetup:
    return ProducerSetup(node, ProducerConfig(parse_name(prefix), **kw), attach)


def _legit(n: int = N_LEGIT, prefix: str = TARGET_P, rate: float = LEGIT_RATE):
    return [ClientSetup(f"legit{i}", [ConsumerConfig(parse_name(prefix), rate, "I3")])
            for i in range(n)]


def _attackers(kind: str, n: int = N_ATTACKERS, prefix: str = TARGET_P, start: float = 3.0,
               rate: float = ATTACK_RATE, universe: int = 500):
    return [ClientSetup(f"atk{i}", [AttackSpec(kind, rate, parse_name(prefix), start, universe)])
            for i in range(n)]


def i1_resilience(cache: bool, universe: int = 500, duration: float = 15.0,
                  seed: int = 1) -> ScenarioConfig:
    return ScenarioConfig(
        name="i1_resilience_cache" if cache else "i1_resilience_nocache",
        duration=duration, seed=seed, fitt=False,
        cs_capacity=200 if cache else 0,
        producers=[_server(static_name_count=universe, freshness=4.0, capacity=1e9)],
        clients=_attackers("I1", universe=universe),
    )


def fake_attack(duration: float = 20.0, seed: int = 1) -> ScenarioConfig:
    return ScenarioConfig(
        name="fake_attack", duration=duration, seed=seed,
        producers=[_server(capacity=1500.0)],
        clients=_attackers("I2") + _legit(),
    )


def valid_attack(duration: float = 30.0, seed: int = 1) -> ScenarioConfig:
    return ScenarioConfig(
        name="valid_attack", duration=duration, seed=seed,
        timers=Timers(rate_limit_timer=3.0),
        producers=[_server(capacity=1500.0)],
        clients=_attackers("I3") + _legit(),
    )


def mixed_attack(duration: float = 30.0, seed: int = 1) -> ScenarioConfig:
    return ScenarioConfig(
        name="mixed_attack", duration=duration, seed=seed,
        timers=Timers(rate_limit_timer=3.0),
        producers=[_server(capacity=1500.0)],
        clients=_attackers("MIXED") + _legit(),
    )


def two_prefix_target(i: int, per_round: int = 12) -> int:
    """0 for P, 1 for P'; splits attackers in half while mixing both on every edge."""
    return (i + i // per_round) % 2


def two_prefix(duration: float = 30.0, seed: int = 1, attack_p: bool = True,
               attack_p2: bool = True) -> ScenarioConfig:
    prefixes = (TARGET_P, TARGET_P2)
    starts = (2.0, 4.0)
    enabled = (attack_p, attack_p2)
    clients = []
    for i in range(N_ATTACKERS):
        k = two_prefix_target(i)
        if enabled[k]:
            clients.append(ClientSetup(f"atk{i}", [AttackSpec(
                "I3", ATTACK_RATE, parse_name(prefixes[k]), starts[k])]))
        else:
            # zero-length placeholder keeps every other client on the same edge router
            clients.append(ClientSetup(f"atk{i}", [AttackSpec(
                "I3", ATTACK_RATE, parse_name(prefixes[k]), starts[k], stop=starts[k])]))
    for j in range(N_LEGIT):
        clients.append(ClientSetup(f"legit{j}", [ConsumerConfig(
            parse_name(prefixes[j % 2]), LEGIT_RATE, "I3")]))
    name = "two_prefix" if attack_p and attack_p2 else (
        "two_prefix_p_only" if attack_p else "two_prefix_p2_only")
    return ScenarioConfig(
        name=name, duration=duration, seed=seed,
        timers=Timers(rate_limit_timer=3.0),
        producers=[_server(TARGET_P, "server", "core0", capacity=750.0),
                   _server(TARGET_P2, "server2", "core2", capacity=750.0)],
        clients=clients,
    )


def granularity(duration: float = 20.0, seed: int = 1, attack: bool = True) -> ScenarioConfig:
    clients = []
    for i in range(N_ATTACKERS):
        flows: List[FlowConfig] = [ConsumerConfig(parse_name(TARGET_P2), 20.0, "I3")]
        # the baseline keeps a zero-length attack flow so placement and the
        # random stream of each client's traffic to P' stay identical
        flows.append(AttackSpec("I3", ATTACK_RATE, parse_name(TARGET_P), 3.0,
                                stop=None if attack else 3.0))
        clients.append(ClientSetup(f"atk{i}", flows))
    clients += _legit()
    return ScenarioConfig(
        name="granularity" if attack else "granularity_baseline",
        duration=duration, seed=seed,
        producers=[_server(TARGET_P, "server", "core0", capacity=1500.0),
                   _server(TARGET_P2, "server2", "core1", capacity=5000.0)],
        clients=clients,
    )


BUILTINS: Dict[str, Callable[..., ScenarioConfig]] = {
    "i1_resilience_nocache": lambda **kw: i1_resilience(False, **kw),
    "i1_resilience_cache": lambda **kw: i1_resilience(True, **kw),
    "fake_attack": fake_attack,
    "valid_attack": valid_attack,
    "mixed_attack": mixed_attack,
    "two_prefix": two_prefix,
    "granularity": granularity,
}
