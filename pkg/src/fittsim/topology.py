"""Topology descriptions, built-in generators and static route computation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple


class TopologyError(ValueError):
    pass


@dataclass
class NodeSpec:
    name: str
    role: str = "router"  # router | producer | consumer | attacker
    is_edge: bool = False
    fitt_enabled: bool = True


@dataclass
class LinkSpec:
    a: str
    b: str
    delay_ms: float = 10.0
    capacity: Optional[float] = None


@dataclass
class Topology:
    nodes: Dict[str, NodeSpec] = field(default_factory=dict)
    links: List[LinkSpec] = field(default_factory=list)
    # client name -> edge router it hangs off
    attachments: Dict[str, str] = field(default_factory=dict)

    def add_node(self, spec: NodeSpec) -> None:
        if spec.name in self.nodes:
            raise TopologyError(f"duplicate node {spec.name!r}")
        self.nodes[spec.name] = spec

    def add_link(self, a: str, b: str, delay_ms: float = 10.0,
                 capacity: Optional[float] = None) -> None:
        for n in (a, b):
            if n not in self.nodes:
                raise TopologyError(f"link endpoint {n!r} is not a node")
        self.links.append(LinkSpec(a, b, delay_ms, capacity))

    def routers(self) -> List[str]:
        return [n for n, s in self.nodes.items() if s.role == "router"]

    def edge_routers(self) -> List[str]:
        return [n for n, s in self.nodes.items() if s.role == "router" and s.is_edge]

    def neighbors(self) -> Dict[str, List[str]]:
        adj: Dict[str, List[str]] = {n: [] for n in self.nodes}
        for link in self.links:
            adj[link.a].append(link.b)
            adj[link.b].append(link.a)
        return adj


def four_as_mesh(n_as: int = 4, edges_per_as: int = 3, delay_ms: float = 10.0) -> Topology:
    """One core router per AS, cores fully meshed, edge routers hanging off each core.

    Routers are named ``core{a}`` and ``as{a}e{i}``. Clients are attached
    later by :func:`attach_clients`.
    """
    topo = Topology()
    for a in range(n_as):
        topo.add_node(NodeSpec(f"core{a}"))
    for a in range(n_as):
        for b in range(a + 1, n_as):
            topo.add_link(f"core{a}", f"core{b}", delay_ms)
    for a in range(n_as):
        for i in range(edges_per_as):
            e = f"as{a}e{i}"
            topo.add_node(NodeSpec(e, is_edge=True))
            topo.add_link(f"core{a}", e, delay_ms)
    return topo


def edge_order(topo: Topology) -> List[str]:
    """Edge routers interleaved across ASes (as0e0, as1e0, ..., as0e1, ...)."""
    edges = topo.edge_routers()
    by_as: Dict[str, List[str]] = {}
    for e in edges:
        key = e.split("e")[0] if e.startswith("as") else e
        by_as.setdefault(key, []).append(e)
    groups = list(by_as.values())
    out = []
    for i in range(max((len(g) for g in groups), default=0)):
        for g in groups:
            if i < len(g):
                out.append(g[i])
    return out


def attach_clients(topo: Topology, clients: Sequence[Tuple[str, str, Optional[str]]],
                   delay_ms: float = 10.0) -> None:
    """Attach ``(name, role, edge or None)`` clients; unplaced ones go round-robin.

    Attackers and legitimate clients are each spread round-robin over the
    interleaved edge list, so both populations cover every AS.
    """
    order = edge_order(topo)
    if not order:
        raise TopologyError("topology has no edge routers to attach clients to")
    cursor = {"attacker": 0, "consumer": 0}
    for name, role, edge in clients:
        if edge is None:
            k = cursor.get(role, 0)
            edge = order[k % len(order)]
            cursor[role] = k + 1
        if edge not in topo.nodes:
            raise TopologyError(f"client {name!r} attaches to unknown node {edge!r}")
        topo.add_node(NodeSpec(name, role=role, fitt_enabled=False))
        topo.add_link(edge, name, delay_ms)
        topo.attachments[name] = edge


def toy_topology(delay_ms: float = 10.0) -> Topology:
    """Five routers, six clients and one server, as in the FITT overlay example.

    S-R1, R1-R2, R1-R3, R3-R4, R3-R5, plus the lateral R2-R3 overlay link;
    C1,C2 on R2, C3,C4 on R4, C5,C6 on R5. Twelve links in total.
    """
    topo = Topology()
    for r in ("R1", "R2", "R3", "R4", "R5"):
        topo.add_node(NodeSpec(r, is_edge=r in ("R2", "R4", "R5")))
    topo.add_node(NodeSpec("S", role="producer", fitt_enabled=False))
    for a, b in (("S", "R1"), ("R1", "R2"), ("R1", "R3"), ("R3", "R4"), ("R3", "R5"),
                 ("R2", "R3")):
        topo.add_link(a, b, delay_ms)
    for c, r in (("C1", "R2"), ("C2", "R2"), ("C3", "R4"), ("C4", "R4"),
                 ("C5", "R5"), ("C6", "R5")):
        topo.add_node(NodeSpec(c, role="consumer", fitt_enabled=False))
        topo.add_link(r, c, delay_ms)
        topo.attachments[c] = r
    return topo


def routes_toward(topo: Topology, producer: str) -> Dict[str, str]:
    """Next hop toward ``producer`` for every router that can reach it.

    Breadth-first search from the producer over routers only; neighbors are
    visited in name order, so ties resolve deterministically.
    """
    adj = topo.neighbors()
    nodes = topo.nodes
    next_hop: Dict[str, str] = {}
    seen = {producer}
    queue = deque([producer])
    while queue:
        cur = queue.popleft()
        for nb in sorted(adj[cur]):
            if nb in seen or nodes[nb].role != "router":
                continue
            seen.add(nb)
            next_hop[nb] = cur
            queue.append(nb)
    return next_hop


def check_reachability(topo: Topology, producer: str, clients: Sequence[str]) -> None:
    hops = routes_toward(topo, producer)
    adj = topo.neighbors()
    for c in clients:
        ups = [n for n in adj[c] if n in hops or n == producer]
        if not ups:
            raise TopologyError(f"producer {producer!r} is unreachable from client {c!r}")
