"""Greedy geographic forwarding."""

from __future__ import annotations

from ..geometry import distance
from .base import RouteDecision


def greedy_next_hop(self_pos, neighbors, dst: int, dst_pos) -> RouteDecision:
    """Pick the neighbor closest to ``dst_pos`` that makes strict progress.

    ``neighbors`` maps uav id to its last known position. The destination
    wins whenever it is a neighbor; ties go to the lowest id.
    """
    if dst in neighbors:
        return RouteDecision.forward(dst)
    best = None
    best_d = distance(self_pos, dst_pos)
    for nid in sorted(neighbors):
        pos = neighbors[nid]
        if pos is None:
            continue
        d = distance(pos, dst_pos)
        if d < best_d:
            best, best_d = nid, d
    if best is None:
        return RouteDecision.none("local_minimum")
    return RouteDecision.forward(best)
