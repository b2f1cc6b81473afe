"""FITT forwarding strategy.

Victim NACKs are validated against the FIB, traced back through the PIT to
the incoming faces that carried the offending traffic, and regenerated
hop by hop until they reach edge routers. Edge routers turn them into
per-face limits, enforce those with token buckets and run the periodic
compliance check that releases well-behaved faces and halves the limit of
the rest until they are blocked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .engine import US_PER_S, seconds
from .names import FittNackPayload, Nack, Name, Reason, is_prefix_of

UNLIMITED = math.inf
BLOCKED = 0.0


class TokenBucket:
    """Continuous-refill token bucket, depth = one second of tokens."""

    __slots__ = ("rate", "tokens", "last")

    def __init__(self, rate: float, now: int) -> None:
        self.rate = rate
        self.tokens = 0.0
        self.last = now

    def allow(self, now: int) -> bool:
        rate = self.rate
        self.tokens = min(rate, self.tokens + rate * (now - self.last) / US_PER_S)
        self.last = now
        if self.tokens >= 1.0:
            self.tokens -= 1.0
            return True
        return False

    def set_rate(self, rate: float, now: int) -> None:
        if self.rate != UNLIMITED:
            self.tokens = min(self.rate, self.tokens + self.rate * (now - self.last) / US_PER_S)
        self.last = now
        self.rate = rate
        self.tokens = min(self.tokens, rate)


@dataclass
class FaceThrottle:
    limit: float
    initial_limit: float
    window_start: int
    bucket: TokenBucket
    measured_count: int = 0
    blacklisted: bool = False

    @property
    def blocked(self) -> bool:
        return self.limit == BLOCKED

    @property
    def released(self) -> bool:
        return self.limit == UNLIMITED


@dataclass
class FittRecord:
    pref: Name
    rsn: Reason
    revert_deadline: int
    created: int
    # throttles installed on faces this node rate-limits (edge or opaque faces)
    per_face: Dict[int, FaceThrottle] = field(default_factory=dict)
    # last C_i or FakeList_i pushed to each downstream face, replayed on refresh
    downstream: Dict[int, object] = field(default_factory=dict)
    revert_armed: bool = False
    timer_armed: bool = False
    alive: bool = True


@dataclass
class FittParams:
    revert_timer: int = seconds(5.0)
    rate_limit_timer: int = seconds(3.0)
    tolerance: float = 0.05
    blacklist_floor: float = 1.0
    keep_blacklist_on_revert: bool = False


def compute_weights(suspects: Iterable[int]) -> Dict[int, float]:
    faces = sorted(suspects)
    if not faces:
        raise ValueError("compute_weights needs at least one suspect face")
    w = 1.0 / len(faces)
    return {f: w for f in faces}


def suspect_faces(pref: Sequence[str], pit, now: int) -> Set[int]:
    out: Set[int] = set()
    for e in pit.live_entries(now):
        if is_prefix_of(pref, e.name):
            out.update(e.in_faces)
    return out


def partition_fake_list(fake_list: Iterable[Name], pit, now: int) -> Dict[int, List[Name]]:
    parts: Dict[int, List[Name]] = {}
    for n in fake_list:
        e = pit.get(n, now)
        if e is None:
            continue
        for f in sorted(e.in_faces):
            parts.setdefault(f, []).append(n)
    return parts


def validate_nack(arrival_face: int, nack: Nack, fib) -> bool:
    """Accept a NACK only if its prefix falls under a route via the arrival face."""
    pref = nack.payload.pref
    for prefix, hops in fib.entries():
        if arrival_face in hops and is_prefix_of(prefix, pref):
            return True
    return False


class FittStrategy:
    def __init__(self, router, params: Optional[FittParams] = None) -> None:
        self.router = router
        self.params = params or FittParams()
        self.records: Dict[Tuple[Tuple[str, ...], Reason], FittRecord] = {}
        self._by_pref: Dict[Tuple[str, ...], List[FittRecord]] = {}
        # faces kept blocked after revert, only when keep_blacklist_on_revert
        self.blacklist: Dict[Tuple[str, ...], Set[int]] = {}

    @property
    def rec(self):
        return self.router.rec

    def throttles_face(self, face: int) -> bool:
        return self.router.is_edge or face in self.router.opaque_faces

    # ------------------------------------------------------------------ lookups

    def match_label(self, name: Tuple[str, ...]) -> str:
        if not self._by_pref and not self.blacklist:
            return "-"
        for k in range(len(name), -1, -1):
            p = name[:k]
            if p in self._by_pref or p in self.blacklist:
                return "/" + "/".join(p)
        return "-"

    def validate_nack(self, arrival_face: int, nack: Nack) -> bool:
        return validate_nack(arrival_face, nack, self.router.fib)

    def suspect_faces(self, pref: Sequence[str], now: int) -> Set[int]:
        return suspect_faces(pref, self.router.pit, now)

    def partition_fake_list(self, fake_list: Iterable[Name], now: int) -> Dict[int, List[Name]]:
        return partition_fake_list(fake_list, self.router.pit, now)

    def effective_limit(self, face: int, name: Tuple[str, ...]) -> float:
        for k in range(len(name), -1, -1):
            p = name[:k]
            if face in self.blacklist.get(p, ()):
                return BLOCKED
            ths = [r.per_face[face] for r in self._by_pref.get(p, ()) if face in r.per_face]
            if ths:
                return min(t.limit for t in ths)
        return UNLIMITED

    # ------------------------------------------------------------------ admission

    def admit_interest(self, face: int, name: Tuple[str, ...], now: int) -> bool:
        by_pref = self._by_pref
        if not by_pref and not self.blacklist:
            return True
        for k in range(len(name), -1, -1):
            p = name[:k]
            if self.blacklist and face in self.blacklist.get(p, ()):
                return False
            recs = by_pref.get(p)
            if not recs:
                continue
            ths = [r.per_face[face] for r in recs if face in r.per_face]
            if not ths:
                continue
            # offered (pre-drop) traffic drives the compliance check
            for t in ths:
                t.measured_count += 1
            eff = min(ths, key=lambda t: t.limit)
            if eff.limit == UNLIMITED:
                return True
            if eff.limit <= 0:
                return False
            return eff.bucket.allow(now)
        return True

    # ------------------------------------------------------------------ reactions

    def handle_nack(self, arrival_face: int, nack: Nack, now: int) -> List[Tuple[int, Nack]]:
        p = nack.payload
        key = (tuple(p.pref), p.rsn)
        record = self.records.get(key)
        if record is None:
            record = FittRecord(p.pref, p.rsn, now + self.params.revert_timer, now)
            self.records[key] = record
            self._by_pref.setdefault(key[0], []).append(record)
            self.rec.event(now, self.router.name, "record_created", str(p.pref))
        else:
            self.rec.event(now, self.router.name, "record_refreshed", str(p.pref))
        record.revert_deadline = now + self.params.revert_timer
        if not record.revert_armed:
            record.revert_armed = True
            self.router.sim.schedule(record.revert_deadline, self.on_revert_timer, record)

        if p.rsn is Reason.FAKE:
            for face, names in self.partition_fake_list(p.fake_list, now).items():
                if face != arrival_face:
                    record.downstream[face] = tuple(names)
        else:
            suspects = self.suspect_faces(p.pref, now) - {arrival_face}
            if suspects:
                for face, w in compute_weights(suspects).items():
                    record.downstream[face] = w * p.capacity

        out: List[Tuple[int, Nack]] = []
        hop_tag = f"{self.router.name}"
        for face in sorted(record.downstream):
            assigned = record.downstream[face]
            if p.rsn is Reason.FAKE:
                payload = FittNackPayload(Reason.FAKE, p.pref, fake_list=assigned)
            else:
                payload = FittNackPayload(Reason.VALID, p.pref, capacity=assigned)
            if self.throttles_face(face):
                c_i = assigned if p.rsn is Reason.VALID else BLOCKED
                if self.install_limit(record, face, c_i, now):
                    out.append((face, Nack(payload, f"{hop_tag}:{face}")))
            else:
                out.append((face, Nack(payload, f"{hop_tag}:{face}")))
        if (p.rsn is Reason.VALID and record.per_face and not record.timer_armed):
            record.timer_armed = True
            self.router.sim.after(self.params.rate_limit_timer, self.on_rate_limit_timer, record)
        return out

    def install_limit(self, record: FittRecord, face: int, c_i: float, now: int) -> bool:
        """Install or tighten the throttle on ``face``; True if newly installed.

        A face already released as compliant, or already blacklisted, keeps its
        state; otherwise the effective limit is the minimum of old and new.
        """
        limit = BLOCKED if record.rsn is Reason.FAKE else float(c_i)
        th = record.per_face.get(face)
        if th is None:
            th = FaceThrottle(limit, limit, now, TokenBucket(limit, now))
            record.per_face[face] = th
            self.rec.event(now, self.router.name, "throttle_installed", str(record.pref),
                           face, limit)
            if limit == BLOCKED:
                self.rec.event(now, self.router.name, "blocked", str(record.pref), face)
            return True
        if th.released or th.blacklisted:
            return False
        if limit < th.limit:
            th.limit = limit
            th.bucket.set_rate(limit, now)
            if limit == BLOCKED:
                self.rec.event(now, self.router.name, "blocked", str(record.pref), face)
        return False

    # ------------------------------------------------------------------ timers

    def on_rate_limit_timer(self, record: FittRecord) -> None:
        if not record.alive:
            return
        now = self.router.sim.now
        params = self.params
        name = self.router.name
        pref = str(record.pref)
        active = False
        for face in sorted(record.per_face):
            th = record.per_face[face]
            if th.released or th.blacklisted:
                continue
            elapsed = (now - th.window_start) / US_PER_S
            count = th.measured_count
            rate = count / elapsed if elapsed > 0 else 0.0
            th.measured_count = 0
            th.window_start = now
            # one Interest of slack absorbs integer counting at low limits
            if count <= th.limit * elapsed * (1.0 + params.tolerance) + 1:
                th.limit = UNLIMITED
                th.bucket.set_rate(UNLIMITED, now)
                self.rec.event(now, name, "released", pref, face, rate)
                self.router.notify_lift(face, record.pref)
                continue
            new_limit = th.limit / 2.0
            if new_limit < params.blacklist_floor:
                th.limit = BLOCKED
                th.blacklisted = True
                th.bucket.set_rate(BLOCKED, now)
                self.rec.event(now, name, "blacklisted", pref, face, rate)
                self.rec.event(now, name, "blocked", pref, face)
                self.rec.add(now, name, pref, "blacklist_transitions")
            else:
                th.limit = new_limit
                th.bucket.set_rate(new_limit, now)
                self.rec.event(now, name, "halved", pref, face, new_limit)
                self.rec.add(now, name, pref, "halving_events")
                # tell the sender its new limit so a compliant one can follow it
                payload = FittNackPayload(Reason.VALID, record.pref, capacity=new_limit)
                self.router.send(face, Nack(payload, f"{name}:{face}"))
                self.router.count("nack_out", face, pref)
                active = True
        if active:
            self.router.sim.after(params.rate_limit_timer, self.on_rate_limit_timer, record)
        else:
            record.timer_armed = False

    def on_revert_timer(self, record: FittRecord) -> None:
        now = self.router.sim.now
        if not record.alive:
            return
        if record.revert_deadline > now:
            self.router.sim.schedule(record.revert_deadline, self.on_revert_timer, record)
            return
        self.remove_record(record, now)

    def remove_record(self, record: FittRecord, now: int) -> None:
        record.alive = False
        key = (tuple(record.pref), record.rsn)
        self.records.pop(key, None)
        recs = self._by_pref.get(key[0], [])
        if record in recs:
            recs.remove(record)
        if not recs:
            self._by_pref.pop(key[0], None)
        if self.params.keep_blacklist_on_revert:
            kept = {f for f, th in record.per_face.items() if th.blacklisted}
            if kept:
                self.blacklist.setdefault(key[0], set()).update(kept)
        self.rec.event(now, self.router.name, "reverted", str(record.pref))

    # ------------------------------------------------------------------ sampling

    def sample_limits(self, t: int) -> None:
        """Record the effective limit of every throttled (face, prefix) pair."""
        for pref in sorted(self._by_pref):
            faces = sorted({f for r in self._by_pref[pref] for f in r.per_face})
            for face in faces:
                limit = self.effective_limit(face, pref)
                if limit != UNLIMITED:
                    self.rec.gauge(t, f"{self.router.name}:{face}", "/" + "/".join(pref),
                                   "limit", limit)
