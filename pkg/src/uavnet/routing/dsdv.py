"""Destination-sequenced distance vector tables.

Sequence numbers are even while a route is alive; a broken route is
advertised with the next odd number and an unreachable metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNREACHABLE = math.inf


@dataclass
class DsdvEntry:
    destination: int
    next_hop: int | None
    hop_metric: float
    sequence_number: int
    installed_at: int = 0

    @property
    def reachable(self) -> bool:
        return self.hop_metric != UNREACHABLE


def _valid(item) -> bool:
    try:
        dst, metric, seq = item
    except (TypeError, ValueError):
        return False
    if not isinstance(dst, int) or not isinstance(seq, int) or seq < 0:
        return False
    if isinstance(metric, bool) or not isinstance(metric, (int, float)):
        return False
    return metric == UNREACHABLE or (metric >= 0 and float(metric).is_integer())


def dsdv_process_update(table: dict[int, DsdvEntry], advert, sender: int, self_id: int | None = None,
                        now: int = 0) -> tuple[dict[int, DsdvEntry], int]:
    """Merge a neighbor's advertisement into ``table`` in place.

    Returns ``(delta, malformed)``: the entries that were installed or
    replaced, and how many advert items were skipped as malformed.
    """
    delta: dict[int, DsdvEntry] = {}
    malformed = 0
    for item in advert:
        if not _valid(item):
            malformed += 1
            continue
        dst, metric, seq = item
        if dst == self_id:
            continue
        broken = seq % 2 == 1 or metric == UNREACHABLE
        new_metric = UNREACHABLE if broken else metric + 1
        cur = table.get(dst)
        if cur is None:
            if broken:
                continue
            adopt = True
        elif seq > cur.sequence_number:
            adopt = True
        else:
            adopt = seq == cur.sequence_number and new_metric < cur.hop_metric
        if adopt:
            e = DsdvEntry(dst, None if broken else sender, new_metric, seq, now)
            table[dst] = e
            delta[dst] = e
    return delta, malformed


def dsdv_handle_link_break(table: dict[int, DsdvEntry], lost_neighbor: int, now: int = 0) -> dict[int, DsdvEntry]:
    """Invalidate every live route through ``lost_neighbor``."""
    delta = {}
    for dst, e in table.items():
        if e.next_hop == lost_neighbor and e.reachable and e.hop_metric > 0:
            ne = DsdvEntry(dst, None, UNREACHABLE, e.sequence_number + 1, now)
            table[dst] = ne
            delta[dst] = ne
    return delta


def advert_items(entries) -> list[tuple[int, float, int]]:
    return [(e.destination, e.hop_metric, e.sequence_number) for e in entries]
