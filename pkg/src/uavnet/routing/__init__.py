"""Routing protocols: greedy forwarding, DSDV, OPAR and Q-routing."""

from .base import DELIVER_LOCAL, FORWARD, NO_ROUTE, NeighborEntry, NeighborTable, RouteDecision
from .dsdv import UNREACHABLE, DsdvEntry, dsdv_handle_link_break, dsdv_process_update
from .greedy import greedy_next_hop
from .opar import Snapshot, link_lifetime, opar_compute_path
from .qrouting import QTable, q_routing_select, q_routing_update
from .agents import PROTOCOLS

__all__ = [
    "DELIVER_LOCAL", "FORWARD", "NO_ROUTE", "NeighborEntry", "NeighborTable", "RouteDecision",
    "UNREACHABLE", "DsdvEntry", "dsdv_handle_link_break", "dsdv_process_update",
    "greedy_next_hop", "Snapshot", "link_lifetime", "opar_compute_path",
    "QTable", "q_routing_select", "q_routing_update", "PROTOCOLS",
]
