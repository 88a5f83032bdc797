"""Shared routing types: decisions and the hello-driven neighbor table."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

FORWARD = "forward"
DELIVER_LOCAL = "deliver_local"
NO_ROUTE = "no_route"


@dataclass(frozen=True)
class RouteDecision:
    verdict: str
    next_hop: int | None = None
    reason: str | None = None

    @classmethod
    def forward(cls, n: int) -> "RouteDecision":
        return cls(FORWARD, n)

    @classmethod
    def local(cls) -> "RouteDecision":
        return cls(DELIVER_LOCAL)

    @classmethod
    def none(cls, reason: str = "no_route") -> "RouteDecision":
        return cls(NO_ROUTE, None, reason)


@dataclass
class NeighborEntry:
    uav_id: int
    position: tuple | None
    velocity: tuple | None
    last_heard: int


class NeighborTable:
    """Neighbors heard within the last ``ttl`` ns."""

    def __init__(self, ttl: int):
        self.ttl = ttl
        self.entries: dict[int, NeighborEntry] = {}

    def upsert(self, uav_id: int, now: int, position=None, velocity=None):
        e = self.entries.get(uav_id)
        if e is None:
            self.entries[uav_id] = NeighborEntry(uav_id, position, velocity, now)
            return
        e.last_heard = now
        if position is not None:
            e.position = position
            e.velocity = velocity

    def remove(self, uav_id: int) -> bool:
        return self.entries.pop(uav_id, None) is not None

    def expire(self, now: int) -> list[int]:
        """Evict stale neighbors and return their ids."""
        gone = [i for i, e in self.entries.items() if now - e.last_heard > self.ttl]
        for i in gone:
            del self.entries[i]
        return gone

    def current(self, now: int) -> dict[int, NeighborEntry]:
        ttl = self.ttl
        return {i: e for i, e in self.entries.items() if now - e.last_heard <= ttl}

    def __contains__(self, uav_id: int) -> bool:
        return uav_id in self.entries

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.entries))

    def __len__(self) -> int:
        return len(self.entries)
