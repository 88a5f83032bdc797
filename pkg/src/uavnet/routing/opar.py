"""Lifetime-constrained minimum-hop path selection on a global snapshot.

A link used as the k-th hop of a path must be predicted to survive at least
``k * hop_time``; among the feasible paths the one with the fewest hops wins,
then the shortest total length. If nothing is feasible the constraint is
dropped.
"""

from __future__ import annotations

import heapq
import math

from ..geometry import distance


def link_lifetime(p_i, v_i, p_j, v_j, comm_range: float) -> float:
    """Time until two UAVs on straight-line courses drift out of range.

    Solves ``|dp + dv t| = comm_range`` for the smallest ``t >= 0``; returns
    ``inf`` when the relative velocity is zero.
    """
    dp = (p_i[0] - p_j[0], p_i[1] - p_j[1], p_i[2] - p_j[2])
    dv = (v_i[0] - v_j[0], v_i[1] - v_j[1], v_i[2] - v_j[2])
    a = dv[0] ** 2 + dv[1] ** 2 + dv[2] ** 2
    if a == 0.0:
        return math.inf
    b = 2.0 * (dp[0] * dv[0] + dp[1] * dv[1] + dp[2] * dv[2])
    c = dp[0] ** 2 + dp[1] ** 2 + dp[2] ** 2 - comm_range * comm_range
    if c >= 0.0:
        # already at (or past) the edge: alive only while closing in
        if b < 0.0:
            disc = b * b - 4 * a * c
            return (-b + math.sqrt(max(disc, 0.0))) / (2 * a)
        return 0.0
    disc = b * b - 4 * a * c
    return max(0.0, (-b + math.sqrt(disc)) / (2 * a))


class Snapshot:
    """Ground-truth positions, velocities and link table at one instant."""

    def __init__(self, positions, velocities, comm_range: float):
        self.positions = list(positions)
        self.velocities = list(velocities)
        self.comm_range = comm_range
        n = len(self.positions)
        self.adj: list[list[tuple[int, float, float]]] = [[] for _ in range(n)]
        r2 = comm_range * comm_range
        for i in range(n):
            pi = self.positions[i]
            for j in range(i + 1, n):
                pj = self.positions[j]
                d2 = (pi[0] - pj[0]) ** 2 + (pi[1] - pj[1]) ** 2 + (pi[2] - pj[2]) ** 2
                if d2 <= r2:
                    life = link_lifetime(pi, self.velocities[i], pj, self.velocities[j], comm_range)
                    d = math.sqrt(d2)
                    self.adj[i].append((j, d, life))
                    self.adj[j].append((i, d, life))

    def links(self):
        return [(i, j) for i, row in enumerate(self.adj) for j, _, _ in row if i < j]


def _search(snap: Snapshot, src: int, dst: int, hop_time: float | None, alive=None):
    best: dict[int, tuple[int, float]] = {src: (0, 0.0)}
    prev: dict[int, int] = {}
    heap = [(0, 0.0, src)]
    while heap:
        hops, length, u = heapq.heappop(heap)
        if best.get(u, (math.inf, math.inf)) < (hops, length):
            continue
        if u == dst:
            path = [dst]
            while path[-1] != src:
                path.append(prev[path[-1]])
            return path[::-1]
        k = hops + 1
        for v, d, life in snap.adj[u]:
            if alive is not None and not alive[v]:
                continue
            if hop_time is not None and life < k * hop_time:
                continue
            cand = (k, length + d)
            if cand < best.get(v, (math.inf, math.inf)):
                best[v] = cand
                prev[v] = u
                heapq.heappush(heap, (k, length + d, v))
    return None


def opar_compute_path(snap: Snapshot, src: int, dst: int, hop_time: float = 0.05, alive=None) -> list[int] | None:
    """Ordered list of UAV ids from ``src`` to ``dst``, or None if disconnected."""
    if src == dst:
        return [src]
    path = _search(snap, src, dst, hop_time, alive)
    if path is None:
        path = _search(snap, src, dst, None, alive)
    return path
