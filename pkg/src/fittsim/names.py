"""Names and the three packet kinds.

A :class:`Name` is a tuple of text components, so slicing and hashing are
cheap and a plain ``tuple`` of the same components compares equal to it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple


class MalformedName(ValueError):
    pass


class Name(tuple):
    """Hierarchical NDN name, e.g. ``/univ1/cs/alice/video.mp4``."""

    __slots__ = ()

    def __new__(cls, components: Iterable[str] = ()):
        comps = tuple(components)
        for c in comps:
            if not isinstance(c, str) or not c or "/" in c:
                raise MalformedName(f"bad name component {c!r}")
        return super().__new__(cls, comps)

    @classmethod
    def parse(cls, text: str) -> "Name":
        return parse_name(text)

    def __str__(self) -> str:
        return "/" + "/".join(self)

    def __repr__(self) -> str:
        return f"Name({str(self)!r})"

    def append(self, *components: str) -> "Name":
        return Name(tuple(self) + components)

    def prefix(self, n: int) -> "Name":
        return Name(tuple(self)[:n])

    def is_prefix_of(self, other: Tuple[str, ...]) -> bool:
        return is_prefix_of(self, other)


def parse_name(text: str) -> Name:
    if not isinstance(text, str) or not text.startswith("/"):
        raise MalformedName(f"name must start with '/': {text!r}")
    if text == "/":
        return Name()
    parts = text[1:].split("/")
    if any(p == "" for p in parts):
        raise MalformedName(f"empty component in {text!r}")
    return Name(parts)


def is_prefix_of(prefix: Tuple[str, ...], name: Tuple[str, ...]) -> bool:
    n = len(prefix)
    return n <= len(name) and tuple(name[:n]) == tuple(prefix)


@dataclass(frozen=True)
class Interest:
    name: Name
    nonce: int
    # producer treats flagged Interests as requests for per-request (I-3) data
    dynamic_flag: bool = False


@dataclass(frozen=True)
class Data:
    name: Name
    freshness_ms: int = 0
    payload_size: int = 1024


class Reason(Enum):
    FAKE = "FAKE"
    VALID = "VALID"


@dataclass(frozen=True)
class FittNackPayload:
    """Victim attack report: reason, attacked prefix, capacity or fake names."""

    rsn: Reason
    pref: Name
    capacity: Optional[float] = None
    fake_list: Optional[Tuple[Name, ...]] = None

    def __post_init__(self):
        if self.rsn is Reason.VALID:
            if self.capacity is None or not self.capacity > 0:
                raise ValueError("VALID report needs a positive capacity")
            if self.fake_list is not None:
                raise ValueError("VALID report carries no fake list")
        else:
            if not self.fake_list:
                raise ValueError("FAKE report needs a non-empty fake list")
            if self.capacity is not None:
                raise ValueError("FAKE report carries no capacity")
            plen = len(self.pref)
            for n in self.fake_list:
                if len(n) <= plen or not is_prefix_of(self.pref, n):
                    raise ValueError(f"{n} is not under {self.pref}")


@dataclass(frozen=True)
class Nack:
    payload: FittNackPayload
    hop_tag: str = ""
