"""Small 3-vector helpers. Plain tuples keep the hot paths cheap."""

from __future__ import annotations

import math
from typing import NamedTuple


class Vector3(NamedTuple):
    x: float
    y: float
    z: float

    def __add__(self, o):  # type: ignore[override]
        return Vector3(self.x + o[0], self.y + o[1], self.z + o[2])

    def __sub__(self, o):
        return Vector3(self.x - o[0], self.y - o[1], self.z - o[2])

    def scale(self, k: float) -> "Vector3":
        return Vector3(self.x * k, self.y * k, self.z * k)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


ZERO = Vector3(0.0, 0.0, 0.0)


class Bounds(NamedTuple):
    """Axis-aligned box ``[0, x] x [0, y] x [0, z]`` in meters."""

    x: float = 600.0
    y: float = 600.0
    z: float = 100.0

    def contains(self, p) -> bool:
        return 0.0 <= p[0] <= self.x and 0.0 <= p[1] <= self.y and 0.0 <= p[2] <= self.z


def distance(a, b) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    dz = a[2] - b[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def heading_vector(speed: float, direction: float, pitch: float) -> Vector3:
    c = math.cos(pitch)
    return Vector3(speed * c * math.cos(direction), speed * c * math.sin(direction), speed * math.sin(pitch))
