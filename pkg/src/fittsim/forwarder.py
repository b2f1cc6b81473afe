"""Per-node NDN forwarding plane: FIB, PIT, Content Store and the receive pipelines."""

from __future__ import annotations

from collections import Counter, OrderedDict, deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Iterator, List, Optional, Set, Tuple

from .engine import Node, Simulator, seconds
from .metrics import Recorder
from .names import Data, Interest, Nack, Name, is_prefix_of


class Fib:
    """Name-prefix routing table with longest-prefix-match lookup."""

    def __init__(self) -> None:
        self._entries: Dict[Tuple[str, ...], List[int]] = {}

    def add(self, prefix: Tuple[str, ...], face: int) -> None:
        hops = self._entries.setdefault(tuple(prefix), [])
        if face not in hops:
            hops.append(face)

    def remove(self, prefix: Tuple[str, ...], face: int) -> None:
        hops = self._entries.get(tuple(prefix))
        if hops and face in hops:
            hops.remove(face)
            if not hops:
                del self._entries[tuple(prefix)]

    def lookup(self, name: Tuple[str, ...]) -> List[int]:
        entries = self._entries
        for k in range(len(name), -1, -1):
            hops = entries.get(name[:k])
            if hops:
                return hops
        return []

    def entries(self) -> Iterator[Tuple[Name, List[int]]]:
        for prefix, hops in self._entries.items():
            yield Name(prefix), list(hops)

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(eq=False)
class PitEntry:
    name: Name
    expiry: int
    in_faces: Dict[int, Set[int]] = field(default_factory=dict)
    out_faces: Set[int] = field(default_factory=set)
    live: bool = True

    def add_in(self, face: int, nonce: int) -> None:
        self.in_faces.setdefault(face, set()).add(nonce)

    def has_nonce(self, face: int, nonce: int) -> bool:
        return nonce in self.in_faces.get(face, ())


class Pit:
    """Pending Interest table.

    Lifetimes are uniform per node, so entries expire in creation order and a
    FIFO of entries is enough to find everything that has timed out.
    """

    def __init__(self, lifetime: int) -> None:
        self.lifetime = lifetime
        self._entries: Dict[Tuple[str, ...], PitEntry] = {}
        self._order: Deque[PitEntry] = deque()

    def get(self, name: Tuple[str, ...], now: int) -> Optional[PitEntry]:
        e = self._entries.get(name)
        if e is not None and e.expiry <= now:
            return None
        return e

    def create(self, name: Name, now: int) -> PitEntry:
        e = PitEntry(name, now + self.lifetime)
        self._entries[name] = e
        self._order.append(e)
        return e

    def remove(self, entry: PitEntry) -> None:
        entry.live = False
        if self._entries.get(entry.name) is entry:
            del self._entries[entry.name]

    def expire(self, now: int) -> List[PitEntry]:
        out = []
        order = self._order
        while order and order[0].expiry <= now:
            e = order.popleft()
            if e.live:
                self.remove(e)
                out.append(e)
        # drop satisfied entries from the head so the FIFO stays short
        while order and not order[0].live:
            order.popleft()
        return out

    def live_entries(self, now: int) -> Iterator[PitEntry]:
        for e in self._entries.values():
            if e.expiry > now:
                yield e

    def __len__(self) -> int:
        return len(self._entries)


class ContentStore:
    """Bounded LRU cache of Data packets honoring freshness."""

    def __init__(self, capacity: int) -> None:
        self.capacity = capacity
        self._entries: "OrderedDict[Tuple[str, ...], Tuple[Data, int, int]]" = OrderedDict()

    def lookup(self, name: Tuple[str, ...], now: int) -> Optional[Data]:
        hit = self._entries.get(name)
        if hit is None:
            return None
        data, inserted, fresh_until = hit
        if now >= fresh_until:
            del self._entries[name]
            return None
        self._entries.move_to_end(name)
        return data

    def insert(self, data: Data, now: int) -> None:
        if self.capacity <= 0 or data.freshness_ms <= 0:
            return
        entries = self._entries
        if data.name in entries:
            del entries[data.name]
        elif len(entries) >= self.capacity:
            entries.popitem(last=False)
        entries[data.name] = (data, now, now + data.freshness_ms * 1000)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name) -> bool:
        return name in self._entries


@dataclass(frozen=True)
class ThrottleLifted:
    """Simulator-side signal that an edge removed the throttle on a client's face.

    Stands in for a client noticing its Interests are no longer dropped. Routers
    ignore it; it never carries protocol state.
    """

    pref: Name


PIT_SWEEP_PERIOD = seconds(0.1)


class Router(Node):
    """NDN forwarder.

    Pipeline for an incoming Interest: strategy admission, CS lookup, PIT
    aggregation, then FIB lookup and forwarding to the first next hop.
    """

    role = "router"

    def __init__(self, name: str, sim: Simulator, recorder: Recorder, *,
                 pit_lifetime: int = seconds(2.0), cs_capacity: int = 0,
                 is_edge: bool = False, fitt_enabled: bool = True) -> None:
        super().__init__(name, sim)
        self.rec = recorder
        self.fib = Fib()
        self.pit = Pit(pit_lifetime)
        self.cs = ContentStore(cs_capacity)
        self.is_edge = is_edge
        self.fitt_enabled = fitt_enabled
        self.strategy = None  # set by attach_strategy
        self.counters: Counter = Counter()
        self.opaque_faces: Set[int] = set()

    def attach_strategy(self, strategy) -> None:
        self.strategy = strategy

    def start(self) -> None:
        self.sim.after(PIT_SWEEP_PERIOD, self._sweep)

    # ------------------------------------------------------------------ helpers

    def count(self, metric: str, face: int, label: str = "-", t: Optional[int] = None) -> None:
        self.counters[(metric, face, label)] += 1
        self.rec.add(self.sim.now if t is None else t, self.name, label, metric)

    def _label(self, name: Tuple[str, ...]) -> str:
        if self.strategy is None:
            return "-"
        return self.strategy.match_label(name)

    def _sweep(self) -> None:
        self.on_pit_expiry(self.sim.now)
        self.sim.after(PIT_SWEEP_PERIOD, self._sweep)

    # ------------------------------------------------------------------ pipelines

    def receive(self, face: int, pkt) -> None:
        t = type(pkt)
        if t is Interest:
            self.receive_interest(face, pkt, self.sim.now)
        elif t is Data:
            self.receive_data(face, pkt, self.sim.now)
        elif t is Nack:
            self.receive_nack(face, pkt, self.sim.now)

    def receive_interest(self, face: int, interest: Interest, now: int) -> None:
        name = interest.name
        label = self._label(name)
        self.count("interests_in", face, label)
        if self.strategy is not None and not self.strategy.admit_interest(face, name, now):
            self.count("dropped_throttled", face, self.strategy.match_label(name))
            return
        data = self.cs.lookup(name, now)
        if data is not None:
            self.count("cs_hit", face, label)
            self.send(face, data)
            self.count("data_out", face, label)
            return
        entry = self.pit.get(name, now)
        if entry is not None:
            if entry.has_nonce(face, interest.nonce):
                self.count("dropped_duplicate", face, label)
                return
            entry.add_in(face, interest.nonce)
            self.count("aggregated", face, label)
            return
        hops = self.fib.lookup(name)
        if not hops:
            self.count("dropped_unroutable", face, label)
            return
        out = hops[0]
        entry = self.pit.create(name, now)
        entry.add_in(face, interest.nonce)
        entry.out_faces.add(out)
        self.send(out, interest)
        self.count("interests_out", out, label)

    def receive_data(self, face: int, data: Data, now: int) -> None:
        name = data.name
        label = self._label(name)
        self.count("data_in", face, label)
        entry = self.pit.get(name, now)
        if entry is None or face not in entry.out_faces:
            self.count("dropped_unsolicited", face, label)
            return
        for f in sorted(entry.in_faces):
            self.send(f, data)
            self.count("data_out", f, label)
        self.pit.remove(entry)
        self.cs.insert(data, now)

    def on_pit_expiry(self, now: int) -> List[PitEntry]:
        expired = self.pit.expire(now)
        for e in expired:
            label = self._label(e.name)
            for f in sorted(e.in_faces):
                self.count("pit_expiries", f, label, t=e.expiry)
        return expired

    def receive_nack(self, face: int, nack: Nack, now: int) -> None:
        pref = str(nack.payload.pref)
        if self.strategy is None or not self.fitt_enabled:
            self.count("nack_ignored", face, pref)
            return
        if not self.strategy.validate_nack(face, nack):
            self.count("dropped_invalid_nack", face, pref)
            self.rec.event(now, self.name, "invalid_nack", pref, face)
            return
        self.count("nack_in", face, pref)
        for out_face, out_nack in self.strategy.handle_nack(face, nack, now):
            self.send(out_face, out_nack)
            self.count("nack_out", out_face, pref)

    def notify_lift(self, face: int, pref: Name) -> None:
        self.send(face, ThrottleLifted(pref))
