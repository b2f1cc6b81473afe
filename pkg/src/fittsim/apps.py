"""Application endpoints: the victim producer and client nodes.

A client node runs one or more flows. A flow is either a consumer
(:class:`ConsumerConfig`, legitimate when compliant) or an attack
(:class:`AttackSpec`). Compliant consumers obey FITT NACKs; attackers and
non-compliant consumers ignore them.
"""

from __future__ import annotations

import random
import string
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional, Tuple, Union

from .engine import Node, Simulator, US_PER_S, seconds
from .forwarder import ThrottleLifted
from .metrics import Recorder
from .names import Data, FittNackPayload, Interest, Nack, Name, Reason, is_prefix_of

TRAFFIC_CLASSES = ("I1", "I3")
ATTACK_KINDS = ("I1", "I2", "I3", "MIXED")
FAKE_DETECTED = "FAKE_DETECTED"

_RANDOM_ALPHABET = string.ascii_letters + string.digits


@dataclass
class ProducerConfig:
    prefix: Name
    capacity: float = 1500.0
    static_name_count: int = 500
    freshness: float = 4.0
    fake_report_interval: float = 1.0
    nack_refresh_interval: float = 1.0
    # keep re-sending the last report for this long after the last detection
    alarm_hold: float = 30.0

    def __post_init__(self):
        if not self.capacity > 0:
            raise ValueError("producer capacity must be > 0")


@dataclass
class ConsumerConfig:
    prefix: Name
    rate: float
    traffic_class: str = "I3"
    start: float = 0.0
    stop: Optional[float] = None
    compliant: bool = True
    name_universe: int = 500

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("consumer rate must be > 0")
        if self.traffic_class not in TRAFFIC_CLASSES:
            raise ValueError(f"traffic_class must be one of {TRAFFIC_CLASSES}")


@dataclass
class AttackSpec:
    kind: str
    rate: float
    target_prefix: Name
    start: float = 3.0
    name_universe: int = 500
    stop: Optional[float] = None

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("attack rate must be > 0")
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"attack kind must be one of {ATTACK_KINDS}")


FlowConfig = Union[ConsumerConfig, AttackSpec]


def random_component(rng: random.Random, length: int = 10) -> str:
    # leading letter keeps the component outside the numeric static universe
    return rng.choice(string.ascii_letters) + "".join(
        rng.choice(_RANDOM_ALPHABET) for _ in range(length - 1))


def attacker_next_name(spec: AttackSpec, rng: random.Random, node: str, seq: int) -> Interest:
    """The ``seq``-th attack Interest emitted by ``node``."""
    nonce = rng.getrandbits(64)
    kind = spec.kind
    if kind == "MIXED":
        kind = "I2" if seq % 2 == 0 else "I3"
    if kind == "I1":
        return Interest(spec.target_prefix.append(str(rng.randrange(spec.name_universe))), nonce)
    if kind == "I2":
        return Interest(spec.target_prefix.append(random_component(rng)), nonce)
    return Interest(spec.target_prefix.append(f"{node}-{seq}"), nonce, dynamic_flag=True)


def consumer_next_name(cfg: ConsumerConfig, rng: random.Random, node: str, seq: int) -> Interest:
    nonce = rng.getrandbits(64)
    if cfg.traffic_class == "I1":
        return Interest(cfg.prefix.append(str(rng.randrange(cfg.name_universe))), nonce)
    return Interest(cfg.prefix.append(f"{node}-{seq}"), nonce, dynamic_flag=True)


class Producer(Node):
    """Victim server: answers valid Interests, detects fake ones, reports overload."""

    role = "producer"

    def __init__(self, name: str, sim: Simulator, recorder: Recorder, cfg: ProducerConfig) -> None:
        super().__init__(name, sim)
        self.rec = recorder
        self.cfg = cfg
        self.prefix_text = str(cfg.prefix)
        self._plen = len(cfg.prefix)
        self._fake_window: Dict[Name, None] = {}
        self._valid_times: Deque[int] = deque()
        # rsn -> (last detection, last payload, last send)
        self._alarm: Dict[Reason, Tuple[int, FittNackPayload, int]] = {}
        self.routing_errors = 0
        self.nacks_sent: List[Tuple[int, FittNackPayload]] = []
        for metric in ("received", "received_legit", "received_attack"):
            recorder.declare(name, self.prefix_text, metric)
        recorder.producer_prefixes[(name, self.prefix_text)] = None

    def start(self) -> None:
        self.sim.after(seconds(self.cfg.fake_report_interval), self._tick)

    def receive(self, face: int, pkt) -> None:
        if type(pkt) is Interest:
            reply = self.producer_on_interest(pkt, self.sim.now)
            if isinstance(reply, Data):
                self.send(face, reply)

    def is_static(self, name: Tuple[str, ...]) -> bool:
        if len(name) != self._plen + 1:
            return False
        last = name[-1]
        if not last.isdigit() or (len(last) > 1 and last[0] == "0"):
            return False
        return int(last) < self.cfg.static_name_count

    def producer_on_interest(self, interest: Interest, now: int):
        name = interest.name
        if not is_prefix_of(self.cfg.prefix, name):
            self.routing_errors += 1
            self.rec.add(now, self.name, "-", "routing_errors")
            return None
        rec = self.rec
        rec.add(now, self.name, self.prefix_text, "received")
        origin = rec.origin_of(interest.nonce)
        if origin is not None:
            rec.add(now, self.name, self.prefix_text,
                    "received_legit" if origin.legit else "received_attack")
        if self.is_static(name):
            self._valid_times.append(now)
            return Data(name, int(round(self.cfg.freshness * 1000)))
        if interest.dynamic_flag:
            self._valid_times.append(now)
            return Data(name, 0)
        self._fake_window[name] = None
        rec.add(now, self.name, self.prefix_text, "fake_detected")
        return FAKE_DETECTED

    def valid_rate(self, now: int) -> float:
        """Valid Interests received over the last second."""
        times = self._valid_times
        horizon = now - US_PER_S
        while times and times[0] <= horizon:
            times.popleft()
        return float(len(times))

    def producer_tick(self, now: int) -> List[Nack]:
        out: List[Nack] = []
        cfg = self.cfg
        if self._fake_window:
            payload = FittNackPayload(Reason.FAKE, cfg.prefix, fake_list=tuple(self._fake_window))
            self._fake_window = {}
            self._alarm[Reason.FAKE] = (now, payload, now)
            out.append(Nack(payload, self.name))
        else:
            out.extend(self._refresh(Reason.FAKE, now))
        if self.valid_rate(now) > cfg.capacity:
            payload = FittNackPayload(Reason.VALID, cfg.prefix, capacity=cfg.capacity)
            self._alarm[Reason.VALID] = (now, payload, now)
            out.append(Nack(payload, self.name))
        else:
            out.extend(self._refresh(Reason.VALID, now))
        return out

    def _refresh(self, rsn: Reason, now: int) -> List[Nack]:
        alarm = self._alarm.get(rsn)
        if alarm is None:
            return []
        detected, payload, sent = alarm
        if now - detected > seconds(self.cfg.alarm_hold):
            del self._alarm[rsn]
            return []
        if now - sent < seconds(self.cfg.nack_refresh_interval):
            return []
        self._alarm[rsn] = (detected, payload, now)
        return [Nack(payload, self.name)]

    def _tick(self) -> None:
        now = self.sim.now
        for nack in self.producer_tick(now):
            self.nacks_sent.append((now, nack.payload))
            self.rec.add(now, self.name, self.prefix_text, f"nack_{nack.payload.rsn.value.lower()}")
            self.rec.event(now, self.name, f"nack_{nack.payload.rsn.value.lower()}",
                           self.prefix_text)
            for face in sorted(self.faces):
                self.send(face, nack)
        self.sim.after(seconds(self.cfg.fake_report_interval), self._tick)


class Flow:
    """Emission state of one consumer or attack stream on a client."""

    def __init__(self, cfg: FlowConfig, rng: random.Random, ramp_window: float) -> None:
        self.cfg = cfg
        self.rng = rng
        self.seq = 0
        self.is_attack = isinstance(cfg, AttackSpec)
        self.prefix: Name = cfg.target_prefix if self.is_attack else cfg.prefix
        self.prefix_text = str(self.prefix)
        self.base_rate = float(cfg.rate)
        self.cap: Optional[float] = None
        self.ramp: Optional[Tuple[int, float]] = None  # (start time, starting rate)
        self.ramp_us = seconds(ramp_window)

    @property
    def legit(self) -> bool:
        return not self.is_attack and self.cfg.compliant

    def rate(self, now: int) -> float:
        if self.cap is not None:
            return self.cap
        if self.ramp is not None:
            t0, r0 = self.ramp
            frac = (now - t0) / self.ramp_us if self.ramp_us > 0 else 1.0
            if frac >= 1.0:
                self.ramp = None
                return self.base_rate
            return r0 + (self.base_rate - r0) * frac
        return self.base_rate


class Client(Node):
    """End host connected to one edge router; runs consumer and attack flows."""

    role = "consumer"

    def __init__(self, name: str, sim: Simulator, recorder: Recorder, flows: List[FlowConfig],
                 seed: int = 0, ramp_window: float = 3.0, jitter: float = 0.10) -> None:
        super().__init__(name, sim)
        self.rec = recorder
        self.jitter = jitter
        self.flows = [Flow(cfg, random.Random(f"{seed}/{name}/{i}"), ramp_window)
                      for i, cfg in enumerate(flows)]
        if any(f.is_attack or not f.cfg.compliant for f in self.flows):
            self.role = "attacker"
            recorder.attack_nodes[name] = None
        else:
            recorder.legit_nodes[name] = None
        for f in self.flows:
            recorder.declare(name, f.prefix_text, "sent")

    def start(self) -> None:
        for flow in self.flows:
            self.sim.schedule(seconds(flow.cfg.start), self._emit, flow)

    def _emit(self, flow: Flow) -> None:
        now = self.sim.now
        cfg = flow.cfg
        if cfg.stop is not None and now >= seconds(cfg.stop):
            return
        if flow.is_attack:
            interest = attacker_next_name(cfg, flow.rng, self.name, flow.seq)
        else:
            interest = consumer_next_name(cfg, flow.rng, self.name, flow.seq)
        flow.seq += 1
        self.rec.tag(interest.nonce, self.name, flow.legit)
        self.rec.add(now, self.name, flow.prefix_text, "sent")
        self.send(1, interest)
        rate = flow.rate(now)
        gap = flow.rng.uniform(1.0 - self.jitter, 1.0 + self.jitter) / rate
        self.sim.after(max(1, int(gap * US_PER_S)), self._emit, flow)

    def receive(self, face: int, pkt) -> None:
        now = self.sim.now
        t = type(pkt)
        if t is Data:
            for flow in self.flows:
                if is_prefix_of(flow.prefix, pkt.name):
                    self.rec.add(now, self.name, flow.prefix_text, "data_received")
                    break
        elif t is Nack:
            self.rec.add(now, self.name, str(pkt.payload.pref), "nack_received")
            self.consumer_on_nack(pkt, now)
        elif t is ThrottleLifted:
            self.on_throttle_lifted(pkt.pref, now)

    def consumer_on_nack(self, nack: Nack, now: int) -> None:
        p = nack.payload
        for flow in self.flows:
            if flow.is_attack or not flow.cfg.compliant:
                continue
            if not is_prefix_of(p.pref, flow.prefix):
                continue
            if p.rsn is Reason.VALID:
                flow.cap = min(flow.rate(now), p.capacity)
                flow.ramp = None

    def on_throttle_lifted(self, pref: Name, now: int) -> None:
        for flow in self.flows:
            if flow.cap is not None and is_prefix_of(pref, flow.prefix):
                flow.ramp = (now, flow.cap)
                flow.cap = None
