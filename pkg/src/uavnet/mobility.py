"""Random 3-D mobility models: Gauss-Markov, random walk, random waypoint.

Every step function is pure: it takes a ``MotionState`` and returns a new
one. ``rng`` is any object with the ``random.Random`` interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .geometry import Bounds, Vector3, distance, heading_vector

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

MODELS = ("gauss_markov", "random_walk", "random_waypoint")


@dataclass(frozen=True)
class MobilityParams:
    model: str = "gauss_markov"
    update_interval: float = 0.1
    alpha: float = 0.85
    mean_speed: float = 10.0
    speed_sigma: float = 1.0
    direction_sigma: float = 0.1
    pitch_sigma: float = 0.05
    speed_min: float = 0.0
    speed_max: float = math.inf
    pitch_range: float = math.pi / 18
    waypoint_arrival_radius: float = 1.0
    pause_time: float = 0.0
    bounds: Bounds = field(default_factory=Bounds)
    boundary: str = "reflect"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.update_interval <= 0:
            raise ValueError("update_interval must be positive")
        if self.model not in MODELS:
            raise ValueError(f"unknown mobility model {self.model!r}")
        if self.boundary not in ("reflect", "clamp"):
            raise ValueError(f"unknown boundary policy {self.boundary!r}")


@dataclass(frozen=True)
class MotionState:
    position: Vector3
    speed: float = 0.0
    direction: float = 0.0
    pitch: float = 0.0
    mean_direction: float = 0.0
    mean_pitch: float = 0.0
    waypoint: Vector3 | None = None
    pause_left: float = 0.0

    @property
    def velocity(self) -> Vector3:
        return heading_vector(self.speed, self.direction, self.pitch)


def _wrap_angle(a: float) -> float:
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0 else a


def _wrap_pi(a: float) -> float:
    return (a + math.pi) % TWO_PI - math.pi


def enforce_bounds(pos, bounds: Bounds, policy: str = "reflect") -> tuple[Vector3, tuple[bool, bool, bool]]:
    """Bring ``pos`` back into the box.

    Returns the corrected position and, per axis, whether the velocity
    component along that axis must be negated (reflect only).
    """
    out = []
    flips = []
    for v, hi in zip(pos, bounds):
        flip = False
        if policy == "reflect":
            if v > hi:
                v = 2.0 * hi - v
                flip = True
            elif v < 0.0:
                v = -v
                flip = True
        # a step longer than the box itself still has to land inside
        v = min(max(v, 0.0), hi)
        out.append(v)
        flips.append(flip)
    return Vector3(*out), (flips[0], flips[1], flips[2])


def _advance(position, speed, direction, pitch, dt, bounds, policy):
    """Move along the heading and apply the boundary policy.

    Returns ``(position, direction, pitch, flips)`` with the heading
    reflected on every axis that bounced.
    """
    v = heading_vector(speed, direction, pitch)
    raw = (position[0] + v[0] * dt, position[1] + v[1] * dt, position[2] + v[2] * dt)
    pos, flips = enforce_bounds(raw, bounds, policy)
    if flips[0]:
        direction = math.pi - direction
    if flips[1]:
        direction = -direction
    if flips[2]:
        pitch = -pitch
    return pos, _wrap_angle(direction), pitch, flips


def gauss_markov_step(s: MotionState, p: MobilityParams, rng) -> MotionState:
    a = p.alpha
    noise = math.sqrt(max(0.0, 1.0 - a * a))
    speed = a * s.speed + (1.0 - a) * p.mean_speed
    direction = s.direction + (1.0 - a) * _wrap_pi(s.mean_direction - s.direction)
    pitch = a * s.pitch + (1.0 - a) * s.mean_pitch
    if noise > 0.0:
        speed += p.speed_sigma * noise * rng.gauss(0.0, 1.0)
        direction += p.direction_sigma * noise * rng.gauss(0.0, 1.0)
        pitch += p.pitch_sigma * noise * rng.gauss(0.0, 1.0)
    speed = min(max(speed, p.speed_min, 0.0), p.speed_max)
    pitch = min(max(pitch, -HALF_PI), HALF_PI)

    pos, direction, pitch, flips = _advance(
        s.position, speed, direction, pitch, p.update_interval, p.bounds, p.boundary)
    mean_direction = s.mean_direction
    mean_pitch = s.mean_pitch
    # the mean heading bounces with the UAV, otherwise it is pulled back into the wall
    if flips[0]:
        mean_direction = math.pi - mean_direction
    if flips[1]:
        mean_direction = -mean_direction
    if flips[2]:
        mean_pitch = -mean_pitch
    return replace(s, position=pos, speed=speed, direction=direction, pitch=pitch,
                   mean_direction=_wrap_angle(mean_direction), mean_pitch=mean_pitch)


def random_walk_step(s: MotionState, p: MobilityParams, rng) -> MotionState:
    direction = rng.uniform(0.0, TWO_PI)
    pitch = rng.uniform(-p.pitch_range, p.pitch_range)
    lo = max(p.speed_min, 0.0)
    hi = p.speed_max if math.isfinite(p.speed_max) else lo
    speed = rng.uniform(lo, hi) if hi > lo else lo
    pos, direction, pitch, _ = _advance(
        s.position, speed, direction, pitch, p.update_interval, p.bounds, p.boundary)
    return replace(s, position=pos, speed=speed, direction=direction, pitch=pitch)


def _uniform_in(bounds: Bounds, rng) -> Vector3:
    return Vector3(rng.uniform(0.0, bounds.x), rng.uniform(0.0, bounds.y), rng.uniform(0.0, bounds.z))


def random_waypoint_step(s: MotionState, p: MobilityParams, rng) -> MotionState:
    dt = p.update_interval
    if s.pause_left > 0.0:
        return replace(s, speed=0.0, pause_left=max(0.0, s.pause_left - dt))

    if s.waypoint is None or distance(s.position, s.waypoint) <= p.waypoint_arrival_radius:
        arrived = s.waypoint is not None
        lo = max(p.speed_min, 0.0)
        hi = p.speed_max if math.isfinite(p.speed_max) else lo
        speed = rng.uniform(lo, hi) if hi > lo else lo
        return replace(s, waypoint=_uniform_in(p.bounds, rng), speed=speed,
                       pause_left=p.pause_time if arrived else 0.0)

    wp = s.waypoint
    d = distance(s.position, wp)
    dx, dy, dz = wp[0] - s.position[0], wp[1] - s.position[1], wp[2] - s.position[2]
    direction = _wrap_angle(math.atan2(dy, dx))
    pitch = math.asin(max(-1.0, min(1.0, dz / d)))
    step = s.speed * dt
    if step >= d:
        pos = wp
    else:
        k = step / d
        pos = Vector3(s.position[0] + dx * k, s.position[1] + dy * k, s.position[2] + dz * k)
    return replace(s, position=pos, direction=direction, pitch=pitch)


STEPS = {
    "gauss_markov": gauss_markov_step,
    "random_walk": random_walk_step,
    "random_waypoint": random_waypoint_step,
}


def mobility_update(s: MotionState, p: MobilityParams, rng) -> MotionState:
    return STEPS[p.model](s, p, rng)


def initial_state(position, p: MobilityParams, rng) -> MotionState:
    """Starting motion state for a UAV placed at ``position``."""
    if p.model == "gauss_markov":
        direction = rng.uniform(0.0, TWO_PI)
        return MotionState(position=Vector3(*position), speed=p.mean_speed, direction=direction,
                           mean_direction=direction)
    return MotionState(position=Vector3(*position))
