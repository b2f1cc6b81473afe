import pytest

from fittsim.engine import Node, SchedulingError, Simulator, connect, seconds
from fittsim.names import Interest, parse_name
from fittsim.scenario import fake_attack
from fittsim.scenario import build_topology
from fittsim.topology import (TopologyError, attach_clients, four_as_mesh, routes_toward,
                              toy_topology)

from conftest import Sink


def test_empty_queue_returns_immediately():
    sim = Simulator()
    sim.run_until(seconds(5))
    assert sim.now == seconds(5)
    assert sim.events_run == 0


def test_equal_timestamps_run_in_schedule_order():
    sim = Simulator()
    seen = []
    for k in range(5):
        sim.schedule(100, seen.append, k)
    sim.schedule(50, seen.append, "early")
    sim.run_until(100)
    assert seen == ["early", 0, 1, 2, 3, 4]


def test_events_beyond_horizon_stay_queued():
    sim = Simulator()
    seen = []
    sim.schedule(10, seen.append, 1)
    sim.schedule(20, seen.append, 2)
    sim.run_until(15)
    assert seen == [1] and sim.pending() == 1
    sim.run_until(20)
    assert seen == [1, 2]


def test_scheduling_in_the_past_is_an_error():
    sim = Simulator()
    sim.run_until(100)
    with pytest.raises(SchedulingError):
        sim.schedule(99, print)
    with pytest.raises(SchedulingError):
        sim.run_until(50)


def test_link_delay():
    sim = Simulator()
    a, b = Sink("a", sim), Sink("b", sim)
    connect(a, b, delay=seconds(0.010))
    sim.run_until(seconds(1))
    a.send(1, Interest(parse_name("/x"), 1))
    sim.run_until(seconds(2))
    assert b.got[0][0] == seconds(1.010)


def test_link_capacity_serializes_packets():
    sim = Simulator()
    a, b = Sink("a", sim), Sink("b", sim)
    connect(a, b, delay=1000, capacity=100.0)
    for k in range(3):
        a.send(1, Interest(parse_name("/x"), k))
    sim.run_until(seconds(1))
    assert [t for t, _ in b.got] == [1000, 11000, 21000]


def test_toy_topology_has_twelve_links():
    topo = toy_topology()
    roles = [s.role for s in topo.nodes.values()]
    assert roles.count("router") == 5
    assert roles.count("consumer") == 6
    assert roles.count("producer") == 1
    assert len(topo.links) == 12


def test_toy_routes_reach_server():
    hops = routes_toward(toy_topology(), "S")
    assert hops["R1"] == "S"
    assert hops["R4"] == "R3" and hops["R2"] == "R1"


def test_mesh_clients_sit_on_edges_across_all_ases():
    topo = build_topology(fake_attack())
    adj = topo.neighbors()
    clients = [n for n, s in topo.nodes.items() if s.role in ("attacker", "consumer")]
    assert len(clients) == 72
    ases = {"attacker": set(), "consumer": set()}
    for c in clients:
        (edge,) = adj[c]
        assert topo.nodes[edge].is_edge
        ases[topo.nodes[c].role].add(edge[:3])
    assert ases["attacker"] == ases["consumer"] == {"as0", "as1", "as2", "as3"}


def test_mesh_shape():
    topo = four_as_mesh()
    assert len(topo.routers()) == 16
    assert len(topo.edge_routers()) == 12
    assert len(topo.links) == 6 + 12


def test_attach_to_unknown_router():
    topo = four_as_mesh()
    with pytest.raises(TopologyError):
        attach_clients(topo, [("c", "consumer", "nowhere")])
