"""Discrete-event core: virtual clock, event queue, nodes, faces and links.

Simulation time is an integer number of microseconds. Events with equal fire
time run in the order they were scheduled.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

US_PER_S = 1_000_000


def seconds(t: float) -> int:
    """Convert seconds to integer microseconds."""
    return int(round(t * US_PER_S))


class SchedulingError(RuntimeError):
    pass


class Simulator:
    def __init__(self) -> None:
        self.now = 0
        self._queue: List[Tuple[int, int, Callable, tuple]] = []
        self._seq = itertools.count()
        self.events_run = 0

    def schedule(self, at: int, action: Callable, *args: Any) -> None:
        if at < self.now:
            raise SchedulingError(f"event at {at} us scheduled in the past (now={self.now})")
        heapq.heappush(self._queue, (at, next(self._seq), action, args))

    def after(self, delay: int, action: Callable, *args: Any) -> None:
        self.schedule(self.now + delay, action, *args)

    def pending(self) -> int:
        return len(self._queue)

    def run_until(self, t_end: int) -> None:
        if t_end < self.now:
            raise SchedulingError("run_until target lies in the past")
        queue = self._queue
        pop = heapq.heappop
        n = 0
        while queue and queue[0][0] <= t_end:
            at, _, action, args = pop(queue)
            self.now = at
            action(*args)
            n += 1
        self.events_run += n
        self.now = t_end


@dataclass
class Link:
    """Bidirectional point-to-point link with fixed delay and optional pps cap."""

    a: "Node"
    b: "Node"
    delay: int = 10_000
    capacity: Optional[float] = None
    _next_free: Dict[str, int] = field(default_factory=dict, repr=False)

    def arrival_time(self, sender: "Node", now: int) -> int:
        if self.capacity is None:
            return now + self.delay
        # serialize per direction; FIFO follows from the monotone departure time
        depart = max(now, self._next_free.get(sender.name, 0))
        self._next_free[sender.name] = depart + int(round(US_PER_S / self.capacity))
        return depart + self.delay


@dataclass
class Face:
    face_id: int
    link: Link
    peer: "Node"
    peer_face: int


class Node:
    """Anything that owns faces: routers, producers and clients."""

    role = "node"

    def __init__(self, name: str, sim: Simulator) -> None:
        self.name = name
        self.sim = sim
        self.faces: Dict[int, Face] = {}

    def add_face(self, link: Link, peer: "Node") -> int:
        face_id = len(self.faces) + 1
        # peer_face is patched by connect() once both ends exist
        self.faces[face_id] = Face(face_id, link, peer, 0)
        return face_id

    def send(self, face_id: int, pkt: Any) -> None:
        face = self.faces[face_id]
        at = face.link.arrival_time(self, self.sim.now)
        self.sim.schedule(at, face.peer.receive, face.peer_face, pkt)

    def receive(self, face_id: int, pkt: Any) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    def start(self) -> None:
        """Hook called once before the run starts."""

    def face_to(self, peer_name: str) -> int:
        for fid, face in self.faces.items():
            if face.peer.name == peer_name:
                return fid
        raise KeyError(f"{self.name} has no face toward {peer_name}")

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def connect(a: Node, b: Node, delay: int = 10_000, capacity: Optional[float] = None) -> Link:
    link = Link(a, b, delay, capacity)
    fa = a.add_face(link, b)
    fb = b.add_face(link, a)
    a.faces[fa].peer_face = fb
    b.faces[fb].peer_face = fa
    return link
