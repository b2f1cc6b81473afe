import pytest

from fittsim.engine import Node, Simulator, connect, seconds
from fittsim.fitt import FittParams, FittStrategy
from fittsim.forwarder import Router
from fittsim.metrics import Recorder
from fittsim.names import Interest, parse_name


class Sink(Node):
    """Peer that records what it receives."""

    def __init__(self, name, sim):
        super().__init__(name, sim)
        self.got = []

    def receive(self, face_id, pkt):
        self.got.append((self.sim.now, pkt))

    def of_type(self, cls):
        return [p for _, p in self.got if isinstance(p, cls)]


class Harness:
    """One router, an upstream sink on face 1 and downstream sinks on faces 2.."""

    def __init__(self, n_down=3, cs=0, edge=False, fitt=False, lifetime=2.0,
                 route="/univ1", params=None):
        self.sim = Simulator()
        self.rec = Recorder(1000.0)
        self.router = Router("r", self.sim, self.rec, pit_lifetime=seconds(lifetime),
                             cs_capacity=cs, is_edge=edge)
        self.up = Sink("up", self.sim)
        connect(self.router, self.up)
        self.downs = []
        for i in range(n_down):
            d = Sink(f"d{i}", self.sim)
            connect(self.router, d)
            self.downs.append(d)
        self.router.fib.add(parse_name(route), 1)
        if fitt:
            self.router.attach_strategy(FittStrategy(self.router, params or FittParams()))

    @property
    def strategy(self):
        return self.router.strategy

    def at(self, t_s):
        self.sim.run_until(seconds(t_s))
        return self.sim.now

    def interest(self, face, name, nonce, t_s=None):
        now = self.sim.now if t_s is None else self.at(t_s)
        self.router.receive_interest(face, Interest(parse_name(name), nonce), now)


@pytest.fixture
def harness():
    return Harness


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        line, details = VERDICTS[number]
        terminalreporter.write_line(line)
        for d in details:
            terminalreporter.write_line("    " + d)
