"""Virtual-force topology control and connectivity statistics.

Each neighbor pulls (beyond the desired distance) or pushes (inside it) like
a linear spring; the UAV flies along the net force with saturated speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geometry import Bounds, Vector3, ZERO, distance
from .mobility import MotionState, enforce_bounds


@dataclass(frozen=True)
class ForceParams:
    desired_distance: float
    spring_gain: float = 1.0
    gain: float = 0.05
    max_step_speed: float = 10.0
    control_interval: float = 0.5
    interaction_radius: float = math.inf

    def __post_init__(self):
        if self.desired_distance <= 0:
            raise ValueError("desired_distance must be positive")


def _random_unit(rng) -> Vector3:
    # uniform on the sphere
    z = rng.uniform(-1.0, 1.0)
    t = rng.uniform(0.0, 2.0 * math.pi)
    r = math.sqrt(1.0 - z * z)
    return Vector3(r * math.cos(t), r * math.sin(t), z)


def pair_force(p_i, p_j, p: ForceParams, rng=None) -> Vector3:
    """Force on the UAV at ``p_i`` from the one at ``p_j``."""
    d = distance(p_i, p_j)
    if d == 0.0:
        if rng is None:
            raise ValueError("coincident positions need an rng for the repulsion direction")
        u = _random_unit(rng)
        return u.scale(p.spring_gain * p.desired_distance)
    k = p.spring_gain * (d - p.desired_distance) / d
    return Vector3((p_j[0] - p_i[0]) * k, (p_j[1] - p_i[1]) * k, (p_j[2] - p_i[2]) * k)


def virtual_force(self_pos, neighbor_positions, p: ForceParams, rng=None) -> Vector3:
    fx = fy = fz = 0.0
    for q in neighbor_positions:
        if distance(self_pos, q) > p.interaction_radius:
            continue
        f = pair_force(self_pos, q, p, rng)
        fx += f[0]
        fy += f[1]
        fz += f[2]
    return Vector3(fx, fy, fz)


def apply_control_step(state: MotionState, force, p: ForceParams, bounds: Bounds,
                       policy: str = "reflect") -> MotionState:
    mag = math.sqrt(force[0] ** 2 + force[1] ** 2 + force[2] ** 2)
    if mag == 0.0:
        return replace(state, speed=0.0)
    speed = min(mag * p.gain, p.max_step_speed)
    dt = p.control_interval
    k = speed * dt / mag
    raw = (state.position[0] + force[0] * k, state.position[1] + force[1] * k,
           state.position[2] + force[2] * k)
    pos, _ = enforce_bounds(raw, bounds, policy)
    direction = math.atan2(force[1], force[0]) % (2.0 * math.pi)
    pitch = math.asin(max(-1.0, min(1.0, force[2] / mag)))
    return replace(state, position=pos, speed=speed, direction=direction, pitch=pitch)


def adjacency(positions, comm_range: float) -> list[list[int]]:
    n = len(positions)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if distance(positions[i], positions[j]) <= comm_range:
                adj[i].append(j)
                adj[j].append(i)
    return adj


def connectivity_stats(positions, comm_range: float) -> tuple[int, int, int]:
    """``(component_count, edge_count, largest_component_size)``, via DFS."""
    adj = adjacency(positions, comm_range)
    n = len(adj)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack = [s]
        size = 0
        while stack:
            u = stack.pop()
            size += 1
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(size)
    edges = sum(len(a) for a in adj) // 2
    return len(comps), edges, max(comps, default=0)
