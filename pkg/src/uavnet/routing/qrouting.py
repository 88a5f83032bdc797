"""Q-routing: per-(destination, neighbor) delivery-time estimates."""

from __future__ import annotations

from collections import defaultdict

from .base import RouteDecision


class QTable:
    def __init__(self, learning_rate: float = 0.5, initial: float = 0.0):
        if not 0.0 < learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        self.learning_rate = learning_rate
        self.initial = initial
        self.q: dict[int, dict[int, float]] = defaultdict(dict)

    def get(self, dst: int, neighbor: int) -> float:
        return self.q[dst].get(neighbor, self.initial)

    def best(self, dst: int, neighbors) -> float:
        vals = [self.get(dst, n) for n in neighbors]
        return min(vals) if vals else self.initial


def q_routing_select(q: QTable, dst: int, current_neighbors, rng, epsilon: float) -> RouteDecision:
    nbrs = sorted(current_neighbors)
    if not nbrs:
        return RouteDecision.none("no_route")
    if epsilon > 0.0 and rng.random() < epsilon:
        return RouteDecision.forward(nbrs[rng.randrange(len(nbrs))])
    best = min(nbrs, key=lambda n: (q.get(dst, n), n))
    return RouteDecision.forward(best)


def q_routing_update(q: QTable, dst: int, chosen: int, observed_hop_delay: float,
                     neighbor_best_estimate: float) -> QTable:
    if chosen == dst:
        neighbor_best_estimate = 0.0
    old = q.get(dst, chosen)
    q.q[dst][chosen] = old + q.learning_rate * (observed_hop_delay + neighbor_best_estimate - old)
    return q
